fn main() {
    std::process::exit(dtn_lab::cli::run(std::env::args_os()));
}
