use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;
use time4_core::{certify, format_ratio, parse_ratio, Bandwidth, Certificate, LfaError, Theorem};

use crate::exit;

#[derive(Debug, Clone, Args)]
pub struct ProveArgs {
    /// 1: 2-swap, 2: ⌊m/2⌋ swaps, 3: impact α, 4: scratch ν, 5: n-swap.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub theorem: u8,
    /// Swap impact for theorem 3, in (0, 1/2).
    #[arg(long, value_parser = ratio_arg)]
    pub alpha: Option<Bandwidth>,
    /// Scratch fraction for theorem 4, in (0, 1/3).
    #[arg(long, value_parser = ratio_arg)]
    pub nu: Option<Bandwidth>,
    /// First-hop switches.
    #[arg(long)]
    pub n: Option<usize>,
    /// Destination edges.
    #[arg(long)]
    pub m: Option<usize>,
    /// Also write the transcript as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn ratio_arg(s: &str) -> Result<Bandwidth, String> {
    parse_ratio(s).map_err(|_| format!("expected a fraction such as 2/5 or 0.4, got {s:?}"))
}

impl ProveArgs {
    pub fn theorem(&self) -> Result<Theorem, String> {
        let t = self.theorem;
        if self.alpha.is_some() && t != 3 {
            return Err("--alpha applies to theorem 3 only".into());
        }
        if self.nu.is_some() && t != 4 {
            return Err("--nu applies to theorem 4 only".into());
        }
        let (dn, dm) = match t {
            2 => (2, 4),
            5 => (3, 2),
            _ => (2, 2),
        };
        let (n, m) = (self.n.unwrap_or(dn), self.m.unwrap_or(dm));
        Ok(match t {
            1 => Theorem::TwoSwap { n, m },
            2 => Theorem::MHalves { n, m },
            3 => Theorem::Impact { alpha: self.alpha.unwrap_or(Bandwidth::new(2, 5)), n, m },
            4 => Theorem::Scratch { nu: self.nu.unwrap_or(Bandwidth::new(1, 10)), n, m },
            _ => Theorem::NSwap { n, m },
        })
    }
}

pub fn transcript_json(cert: &Certificate) -> serde_json::Value {
    let t = &cert.transcript;
    let steps: Vec<_> = t
        .steps
        .iter()
        .map(|s| {
            json!({
                "source": s.mv.to_string(),
                "controller": s.plan.updates.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
                "forced": s.forced,
                "min_k": s.min_k,
                "impact": s.impact.as_ref().map(format_ratio),
                "transient_peak": s.transient_peak.as_ref().map(format_ratio),
                "loads_after": s.loads_after.iter().map(format_ratio).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "theorem": cert.theorem.number(),
        "claim": cert.theorem.claim(),
        "dims": cert.theorem.dims(),
        "controller": t.controller,
        "steps": steps,
        "verdict": cert.verdict.to_string(),
        "exhaustive": cert.exhaustive,
    })
}

pub fn write_transcript(cert: &Certificate, w: &mut dyn Write) -> std::io::Result<()> {
    let (n, m) = cert.theorem.dims();
    writeln!(w, "theorem {} on n={n}, m={m}: {}", cert.theorem.number(), cert.theorem.claim())?;
    writeln!(w, "controller: {}", cert.transcript.controller)?;
    for (i, s) in cert.transcript.steps.iter().enumerate() {
        let loads: Vec<String> = s.loads_after.iter().map(format_ratio).collect();
        write!(w, "{:>3}. {}", i + 1, s.mv)?;
        for u in &s.plan.updates {
            write!(w, " -> {} {u}", u.classify())?;
        }
        write!(w, "  loads [{}]", loads.join(", "))?;
        if s.forced {
            write!(w, "  FORCED")?;
            if let Some(k) = s.min_k {
                write!(w, " {k}-swap")?;
            }
            if let Some(i) = &s.impact {
                write!(w, " impact {}", format_ratio(i))?;
            }
            if let Some(p) = &s.transient_peak {
                write!(w, " one-sided peak {}", format_ratio(p))?;
            }
        }
        writeln!(w)?;
    }
    if let Some(x) = &cert.exhaustive {
        writeln!(
            w,
            "all controllers: {} positions, {} leaves, at least {} forced swap(s), largest at least {}-swap",
            x.positions, x.leaves, x.min_forced_swaps, x.min_largest_k
        )?;
    }
    writeln!(w, "verdict: {} ({})", cert.verdict, cert.theorem.claim())
}

pub fn run(args: &ProveArgs, stdout: &mut dyn Write) -> u8 {
    let theorem = match args.theorem() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
    };
    let cert = match certify(&theorem) {
        Ok(c) => c,
        Err(LfaError::GuardExceeded(why)) => {
            eprintln!("refusing: search guard exceeded ({why}); try a smaller instance");
            return exit::GUARD_EXCEEDED;
        }
        Err(e @ LfaError::InvalidParameter(_)) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit::REFUTED;
        }
    };
    if let Err(e) = write_transcript(&cert, stdout) {
        eprintln!("error: {e}");
        return exit::REFUTED;
    }
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&transcript_json(&cert)).expect("json values serialize");
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: {}: {e}", path.display());
            return exit::REFUTED;
        }
    }
    if cert.is_certified() {
        exit::OK
    } else {
        exit::REFUTED
    }
}
