fn main() {
    std::process::exit(limbsys::cli::run(std::env::args_os()));
}
