fn main() {
    std::process::exit(entropic_map_cli::run(std::env::args_os()));
}
