use std::io::{IsTerminal, Read};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use incr_cli::{run_batch, run_repl, Backend, CliConfig, EXIT_ERROR};
use incr_core::report::Verbosity;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Trace {
    Min,
    Full,
}

/// Interprets text word by word against a world model.
///
/// Words are read from standard input, whitespace-separated, with "." ending
/// a sentence.
#[derive(Debug, Parser)]
#[command(name = "incr", version)]
struct Args {
    /// Lexicon file, or `demo` for the built-in one.
    #[arg(long, default_value = "demo")]
    lexicon: String,
    /// World file, or a built-in world name (london, rabbits, workshop).
    #[arg(long)]
    world: String,
    #[arg(long, default_value_t = 3)]
    domain_k: usize,
    /// Anticipate modifiers of a sentence while it is being built.
    #[arg(long)]
    s_modifiers: bool,
    #[arg(long, value_enum, default_value = "min")]
    trace: Trace,
    /// Interactive mode; `:undo`, `:state`, `:scopings`, `:context`, `:quit`.
    #[arg(long)]
    repl: bool,
    /// Run on an `incr-service` at this URL; lexicon and world name its catalog entries.
    #[arg(long)]
    connect: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = CliConfig {
        lexicon: args.lexicon,
        world: args.world,
        domain_k: args.domain_k,
        s_modifiers: args.s_modifiers,
        trace: match args.trace {
            Trace::Min => Verbosity::Min,
            Trace::Full => Verbosity::Full,
        },
    };
    let backend = match &args.connect {
        Some(url) => Backend::remote(&cfg, url).map_err(|e| e.to_string()),
        None => Backend::local(&cfg),
    };
    let mut backend = match backend {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr();
    let code = if args.repl {
        let prompt = stdin.is_terminal();
        run_repl(&mut backend, &mut stdin.lock(), cfg.trace, prompt, &mut out, &mut err)
    } else {
        let mut text = String::new();
        if let Err(e) = stdin.lock().read_to_string(&mut text) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
        run_batch(&mut backend, &text, cfg.trace, &mut out, &mut err)
    };
    backend.close();
    ExitCode::from(code)
}
