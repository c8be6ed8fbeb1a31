fn main() {
    std::process::exit(tree_silhouette::cli::run(std::env::args_os()));
}
