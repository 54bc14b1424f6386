fn main() {
    std::process::exit(huffman_delta::cli::main_with_args(std::env::args_os()));
}
