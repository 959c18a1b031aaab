fn main() {
    std::process::exit(nonlocal_sim_cli::run(std::env::args_os()));
}
