use std::io::Write;

fn main() {
    oqrw_tree_core::cli::configure_threads();
    let out = oqrw_tree_core::cli::run(std::env::args_os());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}
