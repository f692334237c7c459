use num_traits::CheckedMul;
use time4_netsim::Nanos;

/// Parses a signed duration with unit `s`, `ms`, `us` or `ns`, e.g. `0.4ms` or `-250us`.
/// A bare number is taken as milliseconds.
pub fn parse_duration(text: &str) -> Result<Nanos, String> {
    let t = text.trim();
    let (num, scale) = [("ns", 1i64), ("us", 1_000), ("µs", 1_000), ("ms", 1_000_000), ("s", 1_000_000_000)]
        .iter()
        .find_map(|(suffix, scale)| t.strip_suffix(suffix).map(|n| (n, *scale)))
        .unwrap_or((t, 1_000_000));
    let ratio = time4_core::parse_ratio(num.trim()).map_err(|_| format!("bad duration {text:?}; try 0.4ms"))?;
    let nanos = ratio.checked_mul(&time4_core::Bandwidth::from(scale)).ok_or_else(|| format!("{text:?} is out of range"))?;
    if !nanos.is_integer() {
        return Err(format!("{text:?} is finer than a nanosecond"));
    }
    Ok(nanos.to_integer())
}

pub fn ms_to_nanos(ms: f64) -> Result<Nanos, String> {
    if !ms.is_finite() || ms.abs() > 1e12 {
        return Err(format!("{ms} ms is out of range"));
    }
    Ok((ms * 1e6).round() as Nanos)
}


/// Parses `seconds[.fraction]` into a wire timestamp, exactly. At most nine fraction digits.
pub fn parse_time(text: &str) -> Result<time4_wire::OfpTime, String> {
    let bad = || format!("bad time {text:?}; expected seconds such as 1700000000.25");
    let (secs, frac) = text.trim().split_once('.').unwrap_or((text.trim(), ""));
    if secs.is_empty() || frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let seconds: u64 = secs.parse().map_err(|_| bad())?;
    let nanoseconds = if frac.is_empty() { 0 } else { format!("{frac:0<9}").parse().map_err(|_| bad())? };
    time4_wire::OfpTime::new(seconds, nanoseconds).map_err(|e| e.to_string())
}
