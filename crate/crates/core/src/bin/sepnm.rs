use clap::Parser;
use sepnm::cli::{run, RunRequest};

fn main() {
    std::process::exit(run(RunRequest::parse()));
}
