fn main() {
    std::process::exit(nlpearson::cli::run(std::env::args_os()));
}
