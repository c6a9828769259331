//! `annulus-sle` command-line entry point.

fn main() {
    std::process::exit(annulus_sle::cli::dispatch(std::env::args()));
}
