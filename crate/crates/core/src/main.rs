fn main() {
    std::process::exit(neurorehab::cli::run(std::env::args_os()));
}
