fn main() {
    std::process::exit(ldpcc::cli::run(std::env::args_os()));
}
