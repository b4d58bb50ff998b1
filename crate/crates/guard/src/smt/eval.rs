//! Concrete term evaluation against an environment.
//!
//! This is the other half of counterexample handling: a model returned by
//! the solver is fed back through this evaluator and must make every
//! assertion true.  The evaluator mirrors solver semantics with one
//! deliberate difference — `ite`, `and`, `or` and `=>` short-circuit, so
//! guarded divisions (`y != 0 and x / y > 1`) evaluate the way the guarded
//! source program would.

use num::{BigInt, BigRational, Integer, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

use super::term::{Op, Term, TermKind};
use super::value::{to_signed, truncate, ArrayValue, Value};

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    bindings: BTreeMap<String, Value>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn set(&mut self, name: impl Into<String>, value: Value) -> &mut Env {
        self.bindings.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    /// Use a model directly as an environment.
    pub fn from_model(model: &super::model::Model) -> Env {
        let mut env = Env::new();
        for (name, value) in model.iter() {
            env.set(name.clone(), value.clone());
        }
        env
    }
}

/// Failure during concrete evaluation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value} does not fit operator {op}")]
    ValueMismatch { op: String, value: String },
    #[error("cannot evaluate {0}")]
    Unevaluable(String),
}

fn mismatch(op: &Op, value: &Value) -> EvalError {
    EvalError::ValueMismatch {
        op: format!("{op:?}"),
        value: value.lexical(),
    }
}

/// Evaluate a term to a concrete value.
pub fn eval(term: &Term, env: &Env) -> Result<Value, EvalError> {
    match term.kind() {
        TermKind::Var(name) => env
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        TermKind::Lit(v) => Ok(v.clone()),
        TermKind::App(op, args) => eval_app(op, args, env),
    }
}

fn eval_bool(term: &Term, env: &Env) -> Result<bool, EvalError> {
    match eval(term, env)? {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError::ValueMismatch {
            op: "bool".into(),
            value: other.lexical(),
        }),
    }
}

fn eval_app(op: &Op, args: &[Term], env: &Env) -> Result<Value, EvalError> {
    use Op::*;
    match op {
        // Short-circuiting connectives.
        And => {
            for a in args {
                if !eval_bool(a, env)? {
                    return Ok(Value::Bool(false));
                }
            }
            Ok(Value::Bool(true))
        }
        Or => {
            for a in args {
                if eval_bool(a, env)? {
                    return Ok(Value::Bool(true));
                }
            }
            Ok(Value::Bool(false))
        }
        Implies => {
            if !eval_bool(&args[0], env)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(eval_bool(&args[1], env)?))
        }
        Ite => {
            if eval_bool(&args[0], env)? {
                eval(&args[1], env)
            } else {
                eval(&args[2], env)
            }
        }
        Not => Ok(Value::Bool(!eval_bool(&args[0], env)?)),
        Eq => {
            let (a, b) = (eval(&args[0], env)?, eval(&args[1], env)?);
            Ok(Value::Bool(values_equal(&a, &b)))
        }
        Ne => {
            let (a, b) = (eval(&args[0], env)?, eval(&args[1], env)?);
            Ok(Value::Bool(!values_equal(&a, &b)))
        }

        Add | Sub | Mul | Min | Max => {
            let a = eval(&args[0], env)?;
            let b = eval(&args[1], env)?;
            numeric_binop(op, a, b)
        }
        Neg => match eval(&args[0], env)? {
            Value::Int(n) => Ok(Value::Int(-n)),
            Value::Real(r) => Ok(Value::Real(-r)),
            v => Err(mismatch(op, &v)),
        },
        Abs => match eval(&args[0], env)? {
            Value::Int(n) => Ok(Value::Int(n.abs())),
            Value::Real(r) => Ok(Value::Real(r.abs())),
            v => Err(mismatch(op, &v)),
        },
        DivReal => {
            let a = as_real(op, eval(&args[0], env)?)?;
            let b = as_real(op, eval(&args[1], env)?)?;
            if b.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(Value::Real(a / b))
        }
        DivFloor | ModFloor => {
            let a = as_int(op, eval(&args[0], env)?)?;
            let b = as_int(op, eval(&args[1], env)?)?;
            if b.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            // `Integer::div_floor`/`mod_floor` round toward negative
            // infinity, matching the source-language semantics.
            if matches!(op, DivFloor) {
                Ok(Value::Int(a.div_floor(&b)))
            } else {
                Ok(Value::Int(a.mod_floor(&b)))
            }
        }
        ToReal => {
            let a = as_int(op, eval(&args[0], env)?)?;
            Ok(Value::Real(BigRational::from_integer(a)))
        }
        Lt | Le | Gt | Ge => {
            let a = eval(&args[0], env)?;
            let b = eval(&args[1], env)?;
            let ord = numeric_cmp(op, &a, &b)?;
            Ok(Value::Bool(match op {
                Lt => ord == std::cmp::Ordering::Less,
                Le => ord != std::cmp::Ordering::Greater,
                Gt => ord == std::cmp::Ordering::Greater,
                _ => ord != std::cmp::Ordering::Less,
            }))
        }

        BvAdd | BvSub | BvAnd | BvOr | BvXor | BvShl | BvLshr | BvAshr => {
            let (wa, a) = as_bits(op, eval(&args[0], env)?)?;
            let (_, b) = as_bits(op, eval(&args[1], env)?)?;
            Ok(Value::bits(wa, bv_binop(op, wa, a, b)))
        }
        BvNeg => {
            let (w, a) = as_bits(op, eval(&args[0], env)?)?;
            Ok(Value::bits(w, a.wrapping_neg()))
        }
        BvSlt | BvSle | BvUlt | BvUle => {
            let (w, a) = as_bits(op, eval(&args[0], env)?)?;
            let (_, b) = as_bits(op, eval(&args[1], env)?)?;
            Ok(Value::Bool(match op {
                BvSlt => to_signed(w, a) < to_signed(w, b),
                BvSle => to_signed(w, a) <= to_signed(w, b),
                BvUlt => a < b,
                _ => a <= b,
            }))
        }
        BvSignBound => {
            let (w, x) = as_bits(op, eval(&args[0], env)?)?;
            let (_, lo) = as_bits(op, eval(&args[1], env)?)?;
            let (_, hi) = as_bits(op, eval(&args[2], env)?)?;
            Ok(Value::Bool(
                to_signed(w, lo) <= to_signed(w, x) && to_signed(w, x) <= to_signed(w, hi),
            ))
        }

        StrConcat => {
            let mut out = String::new();
            for a in args {
                out.push_str(&as_str(op, eval(a, env)?)?);
            }
            Ok(Value::Str(out))
        }
        StrLen => {
            let s = as_str(op, eval(&args[0], env)?)?;
            // SMT string length counts characters, not bytes.
            Ok(Value::int(s.chars().count() as i64))
        }
        StrContains => {
            let s = as_str(op, eval(&args[0], env)?)?;
            let sub = as_str(op, eval(&args[1], env)?)?;
            Ok(Value::Bool(s.contains(&sub)))
        }
        StrPrefixOf => {
            let pre = as_str(op, eval(&args[0], env)?)?;
            let s = as_str(op, eval(&args[1], env)?)?;
            Ok(Value::Bool(s.starts_with(&pre)))
        }
        StrInCharset(charset) => {
            let s = as_str(op, eval(&args[0], env)?)?;
            Ok(Value::Bool(s.chars().all(|c| charset.contains(c))))
        }

        Select => {
            let arr = as_array(op, eval(&args[0], env)?)?;
            let idx = eval(&args[1], env)?;
            match arr.get(&idx) {
                Some(v) => Ok(v.clone()),
                None => Err(EvalError::Unevaluable(format!(
                    "array has no value at {}",
                    idx.lexical()
                ))),
            }
        }
        Store => {
            let arr = as_array(op, eval(&args[0], env)?)?;
            let idx = eval(&args[1], env)?;
            let val = eval(&args[2], env)?;
            Ok(Value::Array(arr.set(idx, val)))
        }
    }
}

/// Semantic equality: arrays compare by mapping, scalars structurally.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Array(x), Value::Array(y)) => x.same_mapping(y),
        _ => a == b,
    }
}

fn numeric_binop(op: &Op, a: Value, b: Value) -> Result<Value, EvalError> {
    use Op::*;
    match (a, b) {
        (Value::Int(a), Value::Int(b)) => Ok(Value::Int(match op {
            Add => a + b,
            Sub => a - b,
            Mul => a * b,
            Min => a.min(b),
            _ => a.max(b),
        })),
        (Value::Real(a), Value::Real(b)) => Ok(Value::Real(match op {
            Add => a + b,
            Sub => a - b,
            Mul => a * b,
            Min => a.min(b),
            _ => a.max(b),
        })),
        (a, _) => Err(mismatch(op, &a)),
    }
}

fn numeric_cmp(op: &Op, a: &Value, b: &Value) -> Result<std::cmp::Ordering, EvalError> {
    match (a, b) {
        (Value::Int(a), Value::Int(b)) => Ok(a.cmp(b)),
        (Value::Real(a), Value::Real(b)) => Ok(a.cmp(b)),
        _ => Err(mismatch(op, a)),
    }
}

fn bv_binop(op: &Op, width: u32, a: u64, b: u64) -> u64 {
    use Op::*;
    match op {
        BvAdd => a.wrapping_add(b),
        BvSub => a.wrapping_sub(b),
        BvAnd => a & b,
        BvOr => a | b,
        BvXor => a ^ b,
        // SMT shifts take the full value of the right operand: shifting by
        // the width or more drains the vector (or fills it with the sign).
        BvShl => {
            if b >= width as u64 {
                0
            } else {
                a << b
            }
        }
        BvLshr => {
            if b >= width as u64 {
                0
            } else {
                truncate(width, a) >> b
            }
        }
        BvAshr => {
            let signed = to_signed(width, a);
            if b >= width as u64 {
                if signed < 0 {
                    u64::MAX
                } else {
                    0
                }
            } else {
                (signed >> b) as u64
            }
        }
        _ => unreachable!(),
    }
}

fn as_int(op: &Op, v: Value) -> Result<BigInt, EvalError> {
    match v {
        Value::Int(n) => Ok(n),
        v => Err(mismatch(op, &v)),
    }
}

fn as_real(op: &Op, v: Value) -> Result<BigRational, EvalError> {
    match v {
        Value::Real(r) => Ok(r),
        v => Err(mismatch(op, &v)),
    }
}

fn as_bits(op: &Op, v: Value) -> Result<(u32, u64), EvalError> {
    match v {
        Value::Bits { width, bits } => Ok((width, bits)),
        v => Err(mismatch(op, &v)),
    }
}

fn as_str(op: &Op, v: Value) -> Result<String, EvalError> {
    match v {
        Value::Str(s) => Ok(s),
        v => Err(mismatch(op, &v)),
    }
}

fn as_array(op: &Op, v: Value) -> Result<ArrayValue, EvalError> {
    match v {
        Value::Array(a) => Ok(a),
        v => Err(mismatch(op, &v)),
    }
}

/// True when every assertion evaluates to `true` under the environment.
/// Used to confirm that solver models really satisfy what was asserted.
pub fn satisfies(assertions: &[Term], env: &Env) -> Result<bool, EvalError> {
    for a in assertions {
        if !eval_bool(a, env)? {
            return Ok(false);
        }
    }
    Ok(true)
}
