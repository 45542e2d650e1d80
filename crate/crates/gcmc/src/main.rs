fn main() {
    std::process::exit(gcmc::run(std::env::args_os()));
}
