fn main() {
    std::process::exit(uncertain_rebalance::cli::run_cli(std::env::args_os()));
}
