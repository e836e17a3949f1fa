use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout();
    let mut err = io::stderr();
    let code = dialplan_cli::run(std::env::args_os(), dialplan_cli::Io { input: &mut input, out: &mut out, err: &mut err });
    ExitCode::from(code as u8)
}
