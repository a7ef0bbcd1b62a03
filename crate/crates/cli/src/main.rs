mod cmd_eval;
mod cmd_gen;
mod cmd_inspect;
mod cmd_predict;
mod cmd_train;
mod manifest;
mod util;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "lthm",
    version,
    about = "Topic models for hypertext: train, predict and evaluate link prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic corpus (and its ground truth) from the generative process
    Gen(cmd_gen::GenArgs),
    /// Train a model on a corpus
    Train(cmd_train::TrainArgs),
    /// Rank link targets for documents under a trained model
    Predict(cmd_predict::PredictArgs),
    /// Score ranking files against held-out links
    Eval(cmd_eval::EvalArgs),
    /// Print the top words and link targets of each topic
    Inspect(cmd_inspect::InspectArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen::run(args),
        Command::Train(args) => cmd_train::run(args),
        Command::Predict(args) => cmd_predict::run(args),
        Command::Eval(args) => cmd_eval::run(args),
        Command::Inspect(args) => cmd_inspect::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(exit_code(&err));
    }
}

/// 1 = usage (handled by the parser above), 2 = data validation, 3 = numerics.
fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<lthm_core::Error>() {
        Some(lthm_core::Error::Numerical(_)) => 3,
        _ => 2,
    }
}
