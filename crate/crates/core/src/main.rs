fn main() {
    std::process::exit(qubit_entropy::cli::run(std::env::args_os()));
}
