fn main() {
    std::process::exit(zs_tspec::cli::main());
}
