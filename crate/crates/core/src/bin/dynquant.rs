use std::io;
use std::process;

fn main() {
    let code =
        dynquant::cli::main_with_args(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    process::exit(code);
}
