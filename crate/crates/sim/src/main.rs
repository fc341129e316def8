fn main() {
    std::process::exit(dat_sim::run_cli(std::env::args_os()));
}
