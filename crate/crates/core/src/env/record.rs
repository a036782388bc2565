//! Episode traces and their line-oriented text form.
//!
//! ```text
//! # hop attempt mu n_sym mcs tti_ms arq_ms decode_error reward action_index snr next_avg_snr tau_before_ms
//! attempt 1 1 0 2 15 0.14285714285714285 0.07142857142857142 0 0.9999 14 812.5 833.3333333333334 2
//! end Success Success 0.42857142857142855
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so parsing a trace
//! reproduces the record exactly. A relay status of `-` means hop 2 never
//! started.

use std::fmt::Write as _;

use super::{Hop, TerminalStatus};
use crate::error::EnvError;
use crate::phy::ResourceAction;

#[derive(Debug, Clone, PartialEq)]
pub struct AttemptRecord {
    pub hop: Hop,
    /// 1-based attempt number within the hop.
    pub attempt: u32,
    pub action_index: usize,
    pub action: ResourceAction,
    pub instant_snr: f64,
    pub next_hop_avg_snr: f64,
    pub remaining_before_ms: f64,
    pub tti_ms: f64,
    pub arq_ms: f64,
    pub decode_error: bool,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub attempts: Vec<AttemptRecord>,
    pub source_status: TerminalStatus,
    /// `None` when hop 2 never started.
    pub relay_status: Option<TerminalStatus>,
    /// Sum of TTI and ARQ time over all attempts of both hops.
    pub total_time_ms: f64,
}

impl Default for EpisodeRecord {
    fn default() -> Self {
        EpisodeRecord {
            attempts: Vec::new(),
            source_status: TerminalStatus::Ongoing,
            relay_status: None,
            total_time_ms: 0.0,
        }
    }
}

const HEADER: &str =
    "# hop attempt mu n_sym mcs tti_ms arq_ms decode_error reward action_index snr next_avg_snr tau_before_ms";

fn status_name(s: TerminalStatus) -> &'static str {
    match s {
        TerminalStatus::Success => "Success",
        TerminalStatus::Failure => "Failure",
        TerminalStatus::Ongoing => "Ongoing",
    }
}

fn parse_status(s: &str) -> Option<TerminalStatus> {
    match s {
        "Success" => Some(TerminalStatus::Success),
        "Failure" => Some(TerminalStatus::Failure),
        "Ongoing" => Some(TerminalStatus::Ongoing),
        _ => None,
    }
}

impl EpisodeRecord {
    pub fn push(&mut self, attempt: AttemptRecord) {
        self.total_time_ms += attempt.tti_ms + attempt.arq_ms;
        self.attempts.push(attempt);
    }

    pub fn delivered(&self) -> bool {
        self.source_status == TerminalStatus::Success && self.relay_status == Some(TerminalStatus::Success)
    }

    pub fn attempts_on(&self, hop: Hop) -> usize {
        self.attempts.iter().filter(|a| a.hop == hop).count()
    }

    pub fn reward_sum(&self, hop: Hop) -> f64 {
        self.attempts.iter().filter(|a| a.hop == hop).map(|a| a.reward).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');
        for a in &self.attempts {
            let (mu, n, mcs) = a.action.triple();
            writeln!(
                out,
                "attempt {} {} {} {} {} {} {} {} {} {} {} {} {}",
                a.hop.number(),
                a.attempt,
                mu,
                n,
                mcs,
                a.tti_ms,
                a.arq_ms,
                u8::from(a.decode_error),
                a.reward,
                a.action_index,
                a.instant_snr,
                a.next_hop_avg_snr,
                a.remaining_before_ms,
            )
            .expect("write to string");
        }
        writeln!(
            out,
            "end {} {} {}",
            status_name(self.source_status),
            self.relay_status.map_or("-", status_name),
            self.total_time_ms
        )
        .expect("write to string");
        out
    }

    pub fn from_text(text: &str) -> Result<EpisodeRecord, EnvError> {
        let mut record = EpisodeRecord::default();
        let mut ended = false;
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let err = |reason: &str| EnvError::Trace { line: line_no, reason: reason.to_string() };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if ended {
                return Err(err("content after end line"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "attempt" => {
                    if fields.len() != 14 {
                        return Err(err("expected 13 attempt fields"));
                    }
                    let num = |i: usize| fields[i].parse::<f64>().map_err(|_| err("bad number"));
                    let int = |i: usize| fields[i].parse::<u32>().map_err(|_| err("bad integer"));
                    let hop = Hop::from_number(int(1)? as u8).ok_or_else(|| err("hop must be 1 or 2"))?;
                    let action = ResourceAction::new(int(3)? as u8, int(4)? as u8, int(5)? as u8)
                        .map_err(|e| err(&e.to_string()))?;
                    record.attempts.push(AttemptRecord {
                        hop,
                        attempt: int(2)?,
                        action,
                        tti_ms: num(6)?,
                        arq_ms: num(7)?,
                        decode_error: match fields[8] {
                            "0" => false,
                            "1" => true,
                            _ => return Err(err("decode flag must be 0 or 1")),
                        },
                        reward: num(9)?,
                        action_index: int(10)? as usize,
                        instant_snr: num(11)?,
                        next_hop_avg_snr: num(12)?,
                        remaining_before_ms: num(13)?,
                    });
                }
                "end" => {
                    if fields.len() != 4 {
                        return Err(err("expected 3 end fields"));
                    }
                    record.source_status = parse_status(fields[1]).ok_or_else(|| err("bad hop 1 status"))?;
                    record.relay_status = match fields[2] {
                        "-" => None,
                        s => Some(parse_status(s).ok_or_else(|| err("bad hop 2 status"))?),
                    };
                    record.total_time_ms = fields[3].parse().map_err(|_| err("bad total time"))?;
                    ended = true;
                }
                _ => return Err(err("unknown record kind")),
            }
        }
        if !ended {
            return Err(EnvError::Trace { line: text.lines().count(), reason: "missing end line".into() });
        }
        Ok(record)
    }
}
