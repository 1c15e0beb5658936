fn main() {
    std::process::exit(superfact::cli::run(std::env::args_os()));
}
