//! Step-by-step checking of algebraic reasoning traces.
//!
//! A trace is a sequence of polynomial equations in one unknown (degree at
//! most 3, exact rational coefficients), one per line.  Each adjacent pair
//! is a claimed implication: every solution of the earlier equation should
//! satisfy the later one.  The claim is checked by refutation — assert the
//! premise and the negated conclusion; a model is a concrete value of the
//! unknown that the rewrite loses or invents.
//!
//! After the first invalid step the remaining steps are marked tainted
//! rather than checked: they reason from a falsehood, so their individual
//! validity says nothing about the trace.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::report::{ObligationRecord, ObligationStatus, Verdict};
use crate::smt::{Decl, Model, Proof, Solver, SolverError, Sort, Term, Value};

/// Maximum supported polynomial degree.
pub const MAX_DEGREE: usize = 3;

/// Dense polynomial over the rationals, `coeffs[i]` the coefficient of
/// `x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: [BigRational; MAX_DEGREE + 1],
}

impl Default for Poly {
    fn default() -> Self {
        Poly {
            coeffs: Default::default(),
        }
    }
}

impl Poly {
    pub fn coeff(&self, power: usize) -> &BigRational {
        &self.coeffs[power]
    }

    fn add_term(&mut self, power: usize, coeff: BigRational) {
        self.coeffs[power] += coeff;
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for i in 0..=MAX_DEGREE {
            out.coeffs[i] -= &other.coeffs[i];
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> usize {
        (0..=MAX_DEGREE)
            .rev()
            .find(|&i| !self.coeffs[i].is_zero())
            .unwrap_or(0)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for i in (0..=MAX_DEGREE).rev() {
            acc = acc * x + &self.coeffs[i];
        }
        acc
    }

    /// Horner-form term over the given unknown.
    fn to_term(&self, x: &Term) -> Term {
        let mut acc = Term::real(self.coeffs[MAX_DEGREE].clone());
        for i in (0..MAX_DEGREE).rev() {
            acc = acc
                .mul(x)
                .expect("real product")
                .add(&Term::real(self.coeffs[i].clone()))
                .expect("real sum");
        }
        acc
    }

    /// Same solution set by scalar proportionality: `p ~ q` iff one is a
    /// nonzero rational multiple of the other (the zero polynomial only
    /// matches itself).
    pub fn proportional(&self, other: &Poly) -> bool {
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        let k = self.degree();
        if k != other.degree() || other.coeffs[k].is_zero() {
            return false;
        }
        let lambda = &self.coeffs[k] / &other.coeffs[k];
        (0..=MAX_DEGREE).all(|i| self.coeffs[i] == &other.coeffs[i] * &lambda)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..=MAX_DEGREE).rev() {
            let c = &self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                if mag.denom().is_one() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                p => write!(f, "x^{p}")?,
            }
        }
        Ok(())
    }
}

/// One parsed equation, keeping its source text for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Poly,
    pub rhs: Poly,
    /// Unknown named in this equation, if any (`6 = 6` has none).
    pub var: Option<String>,
    pub text: String,
    pub line: usize,
}

impl Equation {
    /// `lhs - rhs`, the polynomial whose roots solve the equation.
    pub fn canonical(&self) -> Poly {
        self.lhs.sub(&self.rhs)
    }

    /// Same solution set as another equation.
    pub fn equivalent(&self, other: &Equation) -> bool {
        self.canonical().proportional(&other.canonical())
    }

    /// Does a concrete rational satisfy the equation?
    pub fn satisfied_by(&self, x: &BigRational) -> bool {
        self.canonical().eval(x).is_zero()
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// A parsed reasoning trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasoningTrace {
    pub equations: Vec<Equation>,
    /// The single unknown used across the trace (`x` if none appears).
    pub var: String,
}

/// Errors in trace text.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: exponent {degree} exceeds the supported degree {MAX_DEGREE}")]
    DegreeTooHigh { line: usize, degree: u64 },
    #[error("line {line}: trace uses two unknowns, {first:?} and {second:?}")]
    MultipleUnknowns {
        line: usize,
        first: String,
        second: String,
    },
    #[error("trace contains no equations")]
    Empty,
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Equals,
}

fn lex(line: &str, line_no: usize) -> Result<Vec<Tok>, TraceError> {
    let mut toks = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Num(digits.parse().unwrap()));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(name));
            }
            '+' => {
                chars.next();
                toks.push(Tok::Plus);
            }
            '-' => {
                chars.next();
                toks.push(Tok::Minus);
            }
            '*' => {
                chars.next();
                toks.push(Tok::Star);
            }
            '/' => {
                chars.next();
                toks.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                toks.push(Tok::Caret);
            }
            '=' => {
                chars.next();
                toks.push(Tok::Equals);
            }
            other => {
                return Err(TraceError::Syntax {
                    line: line_no,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(toks)
}

struct PolyParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
    var: Option<String>,
}

impl<'a> PolyParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, message: impl Into<String>) -> TraceError {
        TraceError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn expect_number(&mut self, what: &str) -> Result<BigInt, TraceError> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(n.clone()),
            _ => Err(self.syntax(format!("expected {what}"))),
        }
    }

    /// `poly := [sign] term (sign term)*`
    fn poly(&mut self) -> Result<Poly, TraceError> {
        let mut out = Poly::default();
        let mut sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -BigRational::one()
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                BigRational::one()
            }
            _ => BigRational::one(),
        };
        loop {
            let (power, coeff) = self.term()?;
            out.add_term(power, coeff * &sign);
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    sign = BigRational::one();
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    sign = -BigRational::one();
                }
                _ => break,
            }
        }
        Ok(out)
    }

    /// One monomial: `3`, `3/4`, `x`, `3x^2`, `3/4 * x`, `x/3`.
    fn term(&mut self) -> Result<(usize, BigRational), TraceError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let mut coeff = BigRational::from_integer(n);
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.pos += 1;
                    let den = self.expect_number("a denominator after '/'")?;
                    if den.is_zero() {
                        return Err(self.syntax("division by zero in coefficient"));
                    }
                    coeff /= BigRational::from_integer(den);
                }
                if matches!(self.peek(), Some(Tok::Star)) {
                    self.pos += 1;
                    let (power, var_coeff) = self.variable_part()?;
                    return Ok((power, coeff * var_coeff));
                }
                if matches!(self.peek(), Some(Tok::Ident(_))) {
                    let (power, var_coeff) = self.variable_part()?;
                    return Ok((power, coeff * var_coeff));
                }
                Ok((0, coeff))
            }
            Some(Tok::Ident(_)) => self.variable_part(),
            _ => Err(self.syntax("expected a number or the unknown")),
        }
    }

    /// `x`, `x^2`, optionally followed by `/n`.
    fn variable_part(&mut self) -> Result<(usize, BigRational), TraceError> {
        let name = match self.next() {
            Some(Tok::Ident(name)) => name.clone(),
            _ => return Err(self.syntax("expected the unknown")),
        };
        match &self.var {
            None => self.var = Some(name.clone()),
            Some(existing) if *existing != name => {
                return Err(TraceError::MultipleUnknowns {
                    line: self.line,
                    first: existing.clone(),
                    second: name,
                })
            }
            Some(_) => {}
        }
        let mut power = 1usize;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let exp = self.expect_number("an exponent after '^'")?;
            let exp_u = exp
                .to_string()
                .parse::<u64>()
                .map_err(|_| self.syntax("exponent must be a positive integer"))?;
            if exp_u == 0 {
                return Err(self.syntax("exponent must be at least 1"));
            }
            if exp_u as usize > MAX_DEGREE {
                return Err(TraceError::DegreeTooHigh {
                    line: self.line,
                    degree: exp_u,
                });
            }
            power = exp_u as usize;
        }
        let mut coeff = BigRational::one();
        if matches!(self.peek(), Some(Tok::Slash)) {
            self.pos += 1;
            let den = self.expect_number("a denominator after '/'")?;
            if den.is_zero() {
                return Err(self.syntax("division by zero in coefficient"));
            }
            coeff /= BigRational::from_integer(den);
        }
        Ok((power, coeff))
    }
}

/// Parse a single equation line.
pub fn parse_equation(text: &str, line: usize) -> Result<Equation, TraceError> {
    let toks = lex(text, line)?;
    let eq_positions: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter_map(|(i, t)| (*t == Tok::Equals).then_some(i))
        .collect();
    if eq_positions.len() != 1 {
        return Err(TraceError::Syntax {
            line,
            message: format!("expected exactly one '=', found {}", eq_positions.len()),
        });
    }
    let split = eq_positions[0];
    let mut lhs_parser = PolyParser {
        toks: &toks[..split],
        pos: 0,
        line,
        var: None,
    };
    let lhs = lhs_parser.poly()?;
    if lhs_parser.pos != split {
        return Err(lhs_parser.syntax("trailing input before '='"));
    }
    let mut rhs_parser = PolyParser {
        toks: &toks[split + 1..],
        pos: 0,
        line,
        var: lhs_parser.var.clone(),
    };
    let rhs = rhs_parser.poly()?;
    if rhs_parser.pos != toks.len() - split - 1 {
        return Err(rhs_parser.syntax("trailing input after the equation"));
    }
    Ok(Equation {
        lhs,
        rhs,
        var: rhs_parser.var,
        text: text.trim().to_string(),
        line,
    })
}

/// Parse a whole trace: one equation per line, `#` comments and blank
/// lines ignored.
pub fn parse_trace(text: &str) -> Result<ReasoningTrace, TraceError> {
    let mut equations: Vec<Equation> = Vec::new();
    let mut var: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let eq = parse_equation(line, line_no)?;
        if let Some(name) = &eq.var {
            match &var {
                None => var = Some(name.clone()),
                Some(existing) if existing != name => {
                    return Err(TraceError::MultipleUnknowns {
                        line: line_no,
                        first: existing.clone(),
                        second: name.clone(),
                    })
                }
                Some(_) => {}
            }
        }
        equations.push(eq);
    }
    if equations.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(ReasoningTrace {
        equations,
        var: var.unwrap_or_else(|| "x".to_string()),
    })
}

// ---------------------------------------------------------------------------
// Verification

/// Status of one implication step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepStatus {
    /// Every solution of the premise satisfies the conclusion.
    Valid,
    /// `witness` solves the premise but not the conclusion.
    Invalid { witness: Value },
    /// Downstream of an invalid step; not checked.
    Tainted,
    Unknown { reason: String },
}

/// Result of checking one implication.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCheck {
    pub status: StepStatus,
    pub elapsed_ms: u64,
}

/// Does `before` imply `after` for every value of the unknown?
pub fn check_step(
    before: &Equation,
    after: &Equation,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<StepCheck, SolverError> {
    let var_name = before
        .var
        .clone()
        .or_else(|| after.var.clone())
        .unwrap_or_else(|| "x".to_string());
    let x = Term::var(&var_name, Sort::Real);
    let zero = Term::real(BigRational::zero());
    let premise = before.canonical().to_term(&x).eq(&zero).expect("real eq");
    let conclusion = after.canonical().to_term(&x).eq(&zero).expect("real eq");
    let outcome = solver.prove(
        &[Decl::new(var_name.clone(), Sort::Real)],
        &[premise],
        &conclusion,
        timeout_ms,
    )?;
    let status = match outcome.result {
        Proof::Proven => StepStatus::Valid,
        Proof::Counterexample(model) => StepStatus::Invalid {
            witness: model
                .get(&var_name)
                .cloned()
                .unwrap_or_else(|| Value::real(0, 1)),
        },
        Proof::Unknown { reason } => StepStatus::Unknown { reason },
    };
    Ok(StepCheck {
        status,
        elapsed_ms: outcome.elapsed_ms,
    })
}

/// One step's verdict within a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepVerdict {
    /// Index of the step (step `i` connects equation `i-1` to `i`).
    pub index: usize,
    pub before: String,
    pub after: String,
    pub status: StepStatus,
    pub time_ms: u64,
}

/// Verdict and per-step details for a whole trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOutcome {
    pub steps: Vec<StepVerdict>,
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
}

/// Check every adjacent implication in order; taint everything after the
/// first failure.
pub fn verify_trace(
    trace: &ReasoningTrace,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<TraceOutcome, SolverError> {
    let mut steps = Vec::new();
    let mut obligations = Vec::new();
    let mut verdict = Verdict::Verified;
    let mut failed = false;

    for i in 1..trace.equations.len() {
        let before = &trace.equations[i - 1];
        let after = &trace.equations[i];
        let label = format!("step {i}: {} => {}", before.text, after.text);

        if failed {
            steps.push(StepVerdict {
                index: i,
                before: before.text.clone(),
                after: after.text.clone(),
                status: StepStatus::Tainted,
                time_ms: 0,
            });
            obligations.push(ObligationRecord::new(
                format!("{label} [tainted]"),
                ObligationStatus::Unknown,
                0,
            ));
            continue;
        }

        let check = check_step(before, after, solver, timeout_ms)?;
        let (status_rec, step_status) = match &check.status {
            StepStatus::Valid => (ObligationStatus::Proven, check.status.clone()),
            StepStatus::Invalid { witness } => {
                failed = true;
                if verdict.is_verified() {
                    let mut model = Model::new();
                    model.insert(trace.var.clone(), witness.clone());
                    verdict = Verdict::Unsafe {
                        obligation: label.clone(),
                        witness: format!(
                            "{} = {} satisfies {:?} but not {:?}",
                            trace.var,
                            witness.describe(),
                            before.text,
                            after.text
                        ),
                        model,
                    };
                }
                (ObligationStatus::Violated, check.status.clone())
            }
            StepStatus::Unknown { reason } => {
                failed = true;
                if verdict.is_verified() {
                    verdict = Verdict::Unknown {
                        reason: format!("{label}: {reason}"),
                    };
                }
                (ObligationStatus::Unknown, check.status.clone())
            }
            StepStatus::Tainted => unreachable!("fresh check cannot be tainted"),
        };
        obligations.push(ObligationRecord::new(label, status_rec, check.elapsed_ms));
        steps.push(StepVerdict {
            index: i,
            before: before.text.clone(),
            after: after.text.clone(),
            status: step_status,
            time_ms: check.elapsed_ms,
        });
    }

    Ok(TraceOutcome {
        steps,
        verdict,
        obligations,
    })
}

/// Reference/distilled comparison result.
#[derive(Debug)]
pub struct TraceComparison {
    pub reference: TraceOutcome,
    pub distilled: TraceOutcome,
    /// First equation index where the distilled trace stops matching the
    /// reference (solution-set equality), if it ever does.
    pub first_divergence: Option<usize>,
    /// Overall verdict for the distilled trace in light of the reference.
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
}

/// Comparison preconditions.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompareError {
    #[error(
        "traces start from different premises: reference {reference:?}, distilled {distilled:?}"
    )]
    PremiseMismatch {
        reference: String,
        distilled: String,
    },
}

/// Verify both traces and locate where the distilled one diverges.
///
/// Both traces must share the premise (same solution set).  The distilled
/// trace passes when its own steps are valid and it ends at an equation
/// equivalent to the reference conclusion; a valid-but-different
/// conclusion is reported as unsafe with the divergence point.
pub fn compare_traces(
    reference: &ReasoningTrace,
    distilled: &ReasoningTrace,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<Result<TraceComparison, CompareError>, SolverError> {
    let ref_premise = &reference.equations[0];
    let dist_premise = &distilled.equations[0];
    if !ref_premise.equivalent(dist_premise) {
        return Ok(Err(CompareError::PremiseMismatch {
            reference: ref_premise.text.clone(),
            distilled: dist_premise.text.clone(),
        }));
    }

    let ref_outcome = verify_trace(reference, solver, timeout_ms)?;
    let dist_outcome = verify_trace(distilled, solver, timeout_ms)?;

    let shared = reference.equations.len().min(distilled.equations.len());
    let mut first_divergence = (0..shared)
        .find(|&i| !reference.equations[i].equivalent(&distilled.equations[i]));
    if first_divergence.is_none() && reference.equations.len() != distilled.equations.len() {
        first_divergence = Some(shared);
    }

    let ref_final = reference.equations.last().expect("nonempty");
    let dist_final = distilled.equations.last().expect("nonempty");
    let same_conclusion = ref_final.equivalent(dist_final);

    let mut obligations = dist_outcome.obligations.clone();
    let conclusion_label = format!(
        "distilled conclusion {:?} matches reference {:?}",
        dist_final.text, ref_final.text
    );
    obligations.push(ObligationRecord::new(
        &conclusion_label,
        if same_conclusion {
            ObligationStatus::Proven
        } else {
            ObligationStatus::Violated
        },
        0,
    ));

    let verdict = match (&dist_outcome.verdict, same_conclusion) {
        (Verdict::Verified, true) => Verdict::Verified,
        (Verdict::Verified, false) => Verdict::Unsafe {
            obligation: conclusion_label,
            witness: format!(
                "distilled trace diverges at equation {} and concludes {:?} instead of {:?}",
                first_divergence.unwrap_or(shared),
                dist_final.text,
                ref_final.text
            ),
            model: Model::new(),
        },
        (other, _) => other.clone(),
    };

    Ok(Ok(TraceComparison {
        reference: ref_outcome,
        distilled: dist_outcome,
        first_divergence,
        verdict,
        obligations,
    }))
}
