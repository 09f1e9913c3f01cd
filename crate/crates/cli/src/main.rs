fn main() {
    std::process::exit(mblk_cli::run(std::env::args_os()));
}
