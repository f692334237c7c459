use std::io::Write;

use clap::Args;
use serde::Serialize;
use time4_netsim::{video_samples, Nanos, SimParams};

use crate::output::{emit, with_jobs, write_csv};
use crate::units::parse_duration;
use crate::{usage, RunArgs};

#[derive(Debug, Clone, Args)]
pub struct VideoArgs {
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Scheduling error bound δ.
    #[arg(long, default_value = "1.23ms", value_parser = parse_duration)]
    pub sched_error: Nanos,
    /// How far ahead of sending the swap is scheduled.
    #[arg(long, default_value = "100ms", value_parser = parse_duration)]
    pub advance: Nanos,
    /// Fixed execution offset replacing the random error, e.g. 0.4ms or -0.25ms.
    #[arg(long, value_parser = parse_duration, allow_hyphen_values = true)]
    pub inject: Option<Nanos>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Serialize)]
struct Row {
    run: usize,
    seed: u64,
    sched_error_ms: f64,
    inject_ms: Option<f64>,
    misrouted_packets: f64,
    error_ms: f64,
}

pub fn run(args: &VideoArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    if args.sched_error < 0 || args.advance < 0 {
        return Err(usage("--sched-error and --advance must not be negative"));
    }
    if args.inject.is_some_and(|i| i < -args.advance) {
        return Err(usage("--inject cannot move the swap before it is sent"));
    }
    let params = SimParams { sched_error: args.sched_error, seed: args.run.seed, ..SimParams::type_i(args.run.seed) };
    let samples = with_jobs(args.run.jobs, || video_samples(&params, args.advance, args.inject, args.runs))??;
    let rows: Vec<Row> = samples
        .iter()
        .enumerate()
        .map(|(run, s)| Row {
            run,
            seed: args.run.seed,
            sched_error_ms: time4_netsim::ms(args.sched_error),
            inject_ms: args.inject.map(time4_netsim::ms),
            misrouted_packets: s.misrouted_packets,
            error_ms: s.error_ms,
        })
        .collect();
    emit(args.run.out.as_deref(), stdout, |w| write_csv(w, &rows))
}
