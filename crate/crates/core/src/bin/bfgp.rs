fn main() {
    std::process::exit(butterfly_gp::cli::main());
}
