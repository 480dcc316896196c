fn main() {
    std::process::exit(es_lab::cli::run_main(std::env::args_os()));
}
