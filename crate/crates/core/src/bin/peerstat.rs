fn main() {
    let code = peerstat::cli::run(std::env::args_os());
    std::process::exit(code);
}
