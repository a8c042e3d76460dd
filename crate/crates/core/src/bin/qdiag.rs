use std::io::Write;

fn main() {
    let (out, code) = qdiag::cli::run(std::env::args_os());
    let _ = writeln!(std::io::stdout(), "{out}");
    std::process::exit(code);
}
