fn main() {
    std::process::exit(glossotree_cli::run(std::env::args_os()));
}
