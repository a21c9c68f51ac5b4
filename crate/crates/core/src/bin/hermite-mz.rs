fn main() {
    std::process::exit(hermite_mz::cli::run(std::env::args_os()));
}
