fn main() {
    std::process::exit(metaplectic::run(std::env::args_os()));
}
