//! Mapping between integer operands and molecule releases.
//!
//! A value `x` is sent by releasing `|x|` units of molecules, species A for
//! `x > 0` and species B for `x < 0`; zero is silence. Transmitters share symbol
//! boundaries, so every release is tagged with a symbol (interval) index,
//! counted from 0.
//!
//! Addition puts each operand on its own transmitter in one interval.
//! Subtraction sends the minuend as A and the subtrahend as B. Multiplication
//! repeats one operand over as many intervals as the other operand, and the
//! decoder adds up the per-interval results. Division sends the dividend once
//! and the divisor in every interval, and the decoder counts intervals until
//! the running total goes negative.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Species};

/// One release: `count` molecules of `species` at the start of `symbol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Release {
    pub symbol: usize,
    pub species: Species,
    pub count: u64,
}

/// All releases of one transmitter, ordered by symbol then species.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionSchedule {
    transmitter: usize,
    releases: Vec<Release>,
}

impl EmissionSchedule {
    pub fn new(transmitter: usize) -> Self {
        Self {
            transmitter,
            releases: Vec::new(),
        }
    }

    pub fn transmitter(&self) -> usize {
        self.transmitter
    }

    pub fn releases(&self) -> &[Release] {
        &self.releases
    }

    /// Adds a release. Zero counts are not stored. At most one release per
    /// (symbol, species) pair is allowed.
    pub fn push(&mut self, symbol: usize, species: Species, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let key = (symbol, species);
        match self
            .releases
            .binary_search_by(|r| (r.symbol, r.species).cmp(&key))
        {
            Ok(_) => Err(Error::Encoding(format!(
                "transmitter {} already releases {species:?} in symbol {symbol}",
                self.transmitter
            ))),
            Err(pos) => {
                self.releases.insert(
                    pos,
                    Release {
                        symbol,
                        species,
                        count,
                    },
                );
                Ok(())
            }
        }
    }

    /// Molecules of `species` released in `symbol`.
    pub fn count(&self, symbol: usize, species: Species) -> u64 {
        self.releases
            .iter()
            .find(|r| r.symbol == symbol && r.species == species)
            .map_or(0, |r| r.count)
    }

    /// Last symbol with a release, if any.
    pub fn last_symbol(&self) -> Option<usize> {
        self.releases.last().map(|r| r.symbol)
    }

    fn shifted(&self, offset: usize) -> Self {
        Self {
            transmitter: self.transmitter,
            releases: self
                .releases
                .iter()
                .map(|r| Release {
                    symbol: r.symbol + offset,
                    ..*r
                })
                .collect(),
        }
    }
}

/// How many molecules represent one unit, and which magnitudes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueEncoding {
    scale: u64,
    scale_b: u64,
    alphabet: BTreeSet<u64>,
}

impl ValueEncoding {
    /// `scale` molecules per unit for both species. The alphabet holds the
    /// allowed absolute values (all >= 1).
    pub fn new(scale: u64, alphabet: impl IntoIterator<Item = u64>) -> Result<Self> {
        let alphabet: BTreeSet<u64> = alphabet.into_iter().collect();
        if scale == 0 {
            return Err(Error::Encoding("scale must be at least 1".into()));
        }
        if alphabet.is_empty() || alphabet.contains(&0) {
            return Err(Error::Encoding(
                "alphabet must be non-empty and contain only values >= 1".into(),
            ));
        }
        Ok(Self {
            scale,
            scale_b: scale,
            alphabet,
        })
    }

    /// Magnitudes `1..=s`.
    pub fn with_combinations(scale: u64, s: u64) -> Result<Self> {
        Self::new(scale, 1..=s)
    }

    /// Sets a separate per-unit scale for species B.
    pub fn with_species_b_scale(mut self, scale_b: u64) -> Result<Self> {
        if scale_b == 0 {
            return Err(Error::Encoding("species B scale must be at least 1".into()));
        }
        self.scale_b = scale_b;
        Ok(self)
    }

    /// Chooses the species B scale so that one unit of B produces the same
    /// expected received count as one unit of A, given the per-molecule gains
    /// of the two species at the receiver.
    pub fn equalized(self, gain_a: f64, gain_b: f64) -> Result<Self> {
        if !(gain_a > 0.0 && gain_b > 0.0) {
            return Err(Error::Encoding("species gains must be positive".into()));
        }
        let scale_b = (self.scale as f64 * gain_a / gain_b).round().max(1.0) as u64;
        self.with_species_b_scale(scale_b)
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn scale_for(&self, species: Species) -> u64 {
        match species {
            Species::A => self.scale,
            Species::B => self.scale_b,
        }
    }

    pub fn alphabet(&self) -> &BTreeSet<u64> {
        &self.alphabet
    }

    /// Number of distinct absolute values.
    pub fn combinations(&self) -> usize {
        self.alphabet.len()
    }

    fn check(&self, x: i64) -> Result<()> {
        if x == 0 || self.alphabet.contains(&x.unsigned_abs()) {
            Ok(())
        } else {
            Err(Error::Encoding(format!(
                "|{x}| is not in the value alphabet {:?}",
                self.alphabet
            )))
        }
    }
}

/// Species and molecule count that transmit `x`, or `None` for zero.
pub fn encode_value(x: i64, enc: &ValueEncoding) -> Result<Option<(Species, u64)>> {
    enc.check(x)?;
    Ok(Species::for_value(x).map(|s| (s, x.unsigned_abs() * enc.scale_for(s))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Add,
    Sub,
    Mul,
    Div,
}

impl Operation {
    pub const ALL: [Operation; 4] = [Operation::Add, Operation::Sub, Operation::Mul, Operation::Div];

    /// The exact integer result (truncating division).
    pub fn apply(self, operands: &[i64]) -> Option<i64> {
        match (self, operands) {
            (Operation::Add, xs) => Some(xs.iter().sum()),
            (Operation::Sub, [a, b]) => Some(a - b),
            (Operation::Mul, [a, b]) => Some(a * b),
            (Operation::Div, [a, b]) if *b != 0 => Some(a / b),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Operation::Add => "+",
            Operation::Sub => "-",
            Operation::Mul => "*",
            Operation::Div => "/",
        }
    }
}

/// Emission schedules that carry out one operation, plus what the receiver
/// needs to know to decode it.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationPlan {
    pub op: Operation,
    pub operands: Vec<i64>,
    pub schedules: Vec<EmissionSchedule>,
    /// Number of symbol intervals the receiver observes.
    pub intervals: usize,
}

impl OperationPlan {
    /// The same releases repeated over `n` consecutive blocks of intervals.
    pub fn repeated(&self, n: usize) -> OperationPlan {
        let schedules = self
            .schedules
            .iter()
            .map(|s| {
                let mut out = EmissionSchedule::new(s.transmitter);
                for rep in 0..n {
                    out.releases
                        .extend(s.shifted(rep * self.intervals).releases);
                }
                out
            })
            .collect();
        OperationPlan {
            op: self.op,
            operands: self.operands.clone(),
            schedules,
            intervals: self.intervals * n,
        }
    }

    /// Noiseless received count per interval, given the expected accumulated
    /// count one molecule of each species produces.
    pub fn expected_counts(&self, gain_a: f64, gain_b: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.intervals];
        for s in &self.schedules {
            for r in s.releases() {
                let g = match r.species {
                    Species::A => gain_a,
                    Species::B => -gain_b,
                };
                out[r.symbol] += r.count as f64 * g;
            }
        }
        out
    }
}

fn single_interval(
    op: Operation,
    operands: &[i64],
    values: &[i64],
    enc: &ValueEncoding,
) -> Result<OperationPlan> {
    let mut schedules = Vec::with_capacity(values.len());
    for (tx, &x) in values.iter().enumerate() {
        let mut s = EmissionSchedule::new(tx);
        if let Some((species, count)) = encode_value(x, enc)? {
            s.push(0, species, count)?;
        }
        schedules.push(s);
    }
    Ok(OperationPlan {
        op,
        operands: operands.to_vec(),
        schedules,
        intervals: 1,
    })
}

fn two_operands(op: Operation, operands: &[i64]) -> Result<(i64, i64)> {
    match operands {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Encoding(format!(
            "{op:?} takes two operands, got {}",
            operands.len()
        ))),
    }
}

/// Builds the emission schedules for `op` applied to `operands`.
pub fn plan_operation(op: Operation, operands: &[i64], enc: &ValueEncoding) -> Result<OperationPlan> {
    for &x in operands {
        enc.check(x)?;
    }
    match op {
        Operation::Add => {
            if operands.is_empty() {
                return Err(Error::Encoding("addition needs at least one operand".into()));
            }
            single_interval(op, operands, operands, enc)
        }
        Operation::Sub => {
            let (a, b) = two_operands(op, operands)?;
            single_interval(op, operands, &[a, -b], enc)
        }
        Operation::Mul => {
            let (a, b) = two_operands(op, operands)?;
            if b == 0 {
                return Err(Error::Encoding("multiplier must be non-zero".into()));
            }
            let value = a * b.signum();
            let once = single_interval(Operation::Add, &[value], &[value], enc)?;
            let mut plan = once.repeated(b.unsigned_abs() as usize);
            plan.op = op;
            plan.operands = operands.to_vec();
            Ok(plan)
        }
        Operation::Div => {
            let (a, b) = two_operands(op, operands)?;
            if b == 0 {
                return Err(Error::Encoding("divisor must be non-zero".into()));
            }
            let (ma, mb) = (a.unsigned_abs(), b.unsigned_abs());
            // one interval per subtraction that keeps the total non-negative,
            // plus the one that flips it
            let intervals = (ma / mb) as usize + 1;
            let mut dividend = EmissionSchedule::new(0);
            dividend.push(0, Species::A, ma * enc.scale_for(Species::A))?;
            let mut divisor = EmissionSchedule::new(1);
            for k in 0..intervals {
                divisor.push(k, Species::B, mb * enc.scale_for(Species::B))?;
            }
            Ok(OperationPlan {
                op,
                operands: operands.to_vec(),
                schedules: vec![dividend, divisor],
                intervals,
            })
        }
    }
}

/// Receiver-side knowledge needed to turn counts into units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeContext {
    /// Expected accumulated net count produced by a `+1` operand.
    pub unit_gain: f64,
}

impl DecodeContext {
    pub fn new(unit_gain: f64) -> Result<Self> {
        if unit_gain.is_finite() && unit_gain > 0.0 {
            Ok(Self { unit_gain })
        } else {
            Err(Error::domain(format!("unit gain must be positive, got {unit_gain}")))
        }
    }
}

/// Nearest integer to `count / unit_gain`; exact half-units round toward zero.
pub fn decode_units(count: f64, ctx: &DecodeContext) -> i64 {
    let x = count / ctx.unit_gain;
    let r = x.round();
    if (x - x.trunc()).abs() == 0.5 {
        x.trunc() as i64
    } else {
        r as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisionOutcome {
    pub quotient: i64,
    pub remainder: i64,
    /// Remainder expressed as species A molecules at the transmitter scale.
    pub residual_molecules: u64,
}

fn check_counts(counts: &[f64], plan: &OperationPlan) -> Result<()> {
    if counts.len() != plan.intervals {
        return Err(Error::domain(format!(
            "plan spans {} intervals but {} counts were given",
            plan.intervals,
            counts.len()
        )));
    }
    Ok(())
}

/// Decodes per-interval accumulated net counts into the operation result.
pub fn decode_result(counts: &[f64], plan: &OperationPlan, ctx: &DecodeContext) -> Result<i64> {
    check_counts(counts, plan)?;
    match plan.op {
        Operation::Add | Operation::Sub => Ok(decode_units(counts[0], ctx)),
        Operation::Mul => Ok(counts.iter().map(|&c| decode_units(c, ctx)).sum()),
        Operation::Div => decode_division(counts, plan, ctx, 1).map(|d| d.quotient),
    }
}

/// Quotient and remainder of a division plan. `scale` converts the remainder
/// back into molecules.
pub fn decode_division(
    counts: &[f64],
    plan: &OperationPlan,
    ctx: &DecodeContext,
    scale: u64,
) -> Result<DivisionOutcome> {
    check_counts(counts, plan)?;
    let (a, b) = match plan.op {
        Operation::Div => two_operands(plan.op, &plan.operands)?,
        _ => return Err(Error::domain("not a division plan")),
    };
    let divisor = b.unsigned_abs() as i64;
    let mut total = 0i64;
    let mut quotient = 0i64;
    let mut remainder = None;
    for &c in counts {
        total += decode_units(c, ctx);
        if total < 0 {
            remainder = Some(total + divisor);
            break;
        }
        quotient += 1;
    }
    let remainder = remainder.unwrap_or(total).max(0);
    let sign = a.signum() * b.signum();
    Ok(DivisionOutcome {
        quotient: sign.max(0) * quotient - (-sign).max(0) * quotient,
        remainder: if a < 0 { -remainder } else { remainder },
        residual_molecules: remainder as u64 * scale,
    })
}
