fn main() {
    std::process::exit(tuneprobe::cli::main());
}
