//! Parsing `(get-model)` output back into concrete values.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, Zero};
use thiserror::Error;

use super::term::Sort;
use super::value::{unquote_string, ArrayValue, Value};

/// A satisfying assignment: one concrete value per declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    bindings: BTreeMap<String, Value>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Lexical form of every binding, used for JSON reports.
    pub fn to_lexical_map(&self) -> BTreeMap<String, String> {
        self.bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.lexical()))
            .collect()
    }

    /// Rebuild from lexical forms (reports read back from JSON).
    pub fn from_lexical_map(map: &BTreeMap<String, String>) -> Model {
        let mut m = Model::new();
        for (k, v) in map {
            m.insert(k.clone(), Value::from_lexical(v));
        }
        m
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, value) in &self.bindings {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{name} = {}", value.describe())?;
            first = false;
        }
        Ok(())
    }
}

impl serde::Serialize for Model {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&self.to_lexical_map(), serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, String>::deserialize(deserializer)?;
        Ok(Model::from_lexical_map(&map))
    }
}

/// Malformed model text.  The raw solver output is preserved so failures
/// can be diagnosed from logs alone.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse solver model: {detail}\n--- solver output ---\n{raw}")]
pub struct ModelParseError {
    pub detail: String,
    pub raw: String,
}

fn err(detail: impl Into<String>, raw: &str) -> ModelParseError {
    ModelParseError {
        detail: detail.into(),
        raw: raw.to_string(),
    }
}

/// Parse the text following a `sat` line.
///
/// `sorts` gives the declared sort of each variable; values are interpreted
/// against the declaration rather than the solver's printed sort, which
/// keeps the parser independent of printer quirks.  Variables the solver
/// leaves out are unconstrained; they are completed with the sort's default
/// value so that every declared variable ends up bound.
pub fn parse_model(
    text: &str,
    sorts: &BTreeMap<String, Sort>,
) -> Result<Model, ModelParseError> {
    let sexprs = parse_sexprs(text).map_err(|detail| err(detail, text))?;
    let top = sexprs
        .iter()
        .find_map(|s| match s {
            Sexpr::List(items) => Some(items),
            Sexpr::Atom(_) => None,
        })
        .ok_or_else(|| err("no model list in output", text))?;

    // Two passes: auxiliary function definitions (used by as-array values)
    // first, then the variable bindings themselves.
    let mut aux: BTreeMap<String, &Sexpr> = BTreeMap::new();
    let mut defs: Vec<(&str, &Sexpr)> = Vec::new();
    for item in top {
        let Sexpr::List(parts) = item else {
            // Legacy printers open with the atom `model`.
            continue;
        };
        if parts.len() < 5 {
            continue;
        }
        let Sexpr::Atom(head) = &parts[0] else { continue };
        if head != "define-fun" {
            continue;
        }
        let Sexpr::Atom(name) = &parts[1] else { continue };
        let body = &parts[4];
        match &parts[2] {
            Sexpr::List(args) if args.is_empty() => defs.push((name.as_str(), body)),
            Sexpr::List(_) => {
                aux.insert(name.clone(), body);
            }
            Sexpr::Atom(_) => {}
        }
    }

    let mut model = Model::new();
    for (name, body) in defs {
        let Some(sort) = sorts.get(name) else {
            // Solvers may invent helper constants; ignore them.
            continue;
        };
        let value = value_from_sexpr(body, sort, &aux)
            .map_err(|detail| err(format!("binding {name}: {detail}"), text))?;
        model.insert(name, value);
    }
    for (name, sort) in sorts {
        if model.get(name).is_none() {
            model.insert(name.clone(), default_value(sort));
        }
    }
    Ok(model)
}

/// Default completion for variables the solver did not mention.
pub fn default_value(sort: &Sort) -> Value {
    match sort {
        Sort::Bool => Value::Bool(false),
        Sort::Int => Value::int(0),
        Sort::Real => Value::real(0, 1),
        Sort::BitVec(w) => Value::bits(*w, 0),
        Sort::Str => Value::Str(String::new()),
        Sort::Array(_, e) => Value::Array(ArrayValue {
            default: Some(Box::new(default_value(e))),
            entries: Vec::new(),
        }),
    }
}

// ---------------------------------------------------------------------------
// S-expressions

/// Minimal s-expression tree over solver output tokens.  String literals
/// and `|quoted symbols|` are kept as single atoms (quotes included for
/// strings, pipes stripped for symbols).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub(crate) fn parse_sexprs(text: &str) -> Result<Vec<Sexpr>, String> {
    let mut chars = text.chars().peekable();
    let mut stack: Vec<Vec<Sexpr>> = Vec::new();
    let mut top: Vec<Sexpr> = Vec::new();

    fn push(stack: &mut [Vec<Sexpr>], top: &mut Vec<Sexpr>, s: Sexpr) {
        match stack.last_mut() {
            Some(frame) => frame.push(s),
            None => top.push(s),
        }
    }

    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                stack.push(Vec::new());
            }
            ')' => {
                chars.next();
                let frame = stack.pop().ok_or("unbalanced ')'")?;
                push(&mut stack, &mut top, Sexpr::List(frame));
            }
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '"' => {
                chars.next();
                let mut atom = String::from("\"");
                loop {
                    match chars.next() {
                        Some('"') => {
                            if chars.peek() == Some(&'"') {
                                chars.next();
                                atom.push_str("\"\"");
                            } else {
                                atom.push('"');
                                break;
                            }
                        }
                        Some(c) => atom.push(c),
                        None => return Err("unterminated string literal".into()),
                    }
                }
                push(&mut stack, &mut top, Sexpr::Atom(atom));
            }
            '|' => {
                chars.next();
                let mut atom = String::new();
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(c) => atom.push(c),
                        None => return Err("unterminated quoted symbol".into()),
                    }
                }
                push(&mut stack, &mut top, Sexpr::Atom(atom));
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut atom = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || "()|\";".contains(c) {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                push(&mut stack, &mut top, Sexpr::Atom(atom));
            }
        }
    }
    if !stack.is_empty() {
        return Err("unbalanced '('".into());
    }
    Ok(top)
}

// ---------------------------------------------------------------------------
// Value interpretation

fn value_from_sexpr(
    sexpr: &Sexpr,
    sort: &Sort,
    aux: &BTreeMap<String, &Sexpr>,
) -> Result<Value, String> {
    match sort {
        Sort::Bool => match sexpr {
            Sexpr::Atom(a) if a == "true" => Ok(Value::Bool(true)),
            Sexpr::Atom(a) if a == "false" => Ok(Value::Bool(false)),
            other => Ok(Value::Raw(other.to_string())),
        },
        Sort::Int => Ok(parse_int(sexpr)
            .map(Value::Int)
            .unwrap_or_else(|| Value::Raw(sexpr.to_string()))),
        Sort::Real => Ok(parse_rational(sexpr)
            .map(Value::Real)
            .unwrap_or_else(|| Value::Raw(sexpr.to_string()))),
        Sort::BitVec(width) => {
            Ok(parse_bits(sexpr, *width).unwrap_or_else(|| Value::Raw(sexpr.to_string())))
        }
        Sort::Str => match sexpr {
            Sexpr::Atom(a) if a.starts_with('"') => unquote_string(a)
                .map(Value::Str)
                .ok_or_else(|| format!("bad string literal {a}")),
            other => Ok(Value::Raw(other.to_string())),
        },
        Sort::Array(index, element) => parse_array(sexpr, index, element, aux),
    }
}

fn parse_int(sexpr: &Sexpr) -> Option<BigInt> {
    match sexpr {
        Sexpr::Atom(a) => a.parse().ok(),
        Sexpr::List(items) => match items.as_slice() {
            [Sexpr::Atom(minus), inner] if minus == "-" => Some(-parse_int(inner)?),
            _ => None,
        },
    }
}

fn parse_rational(sexpr: &Sexpr) -> Option<BigRational> {
    match sexpr {
        Sexpr::Atom(a) => parse_decimal(a),
        Sexpr::List(items) => match items.as_slice() {
            [Sexpr::Atom(minus), inner] if minus == "-" => Some(-parse_rational(inner)?),
            [Sexpr::Atom(slash), num, den] if slash == "/" => {
                let d = parse_rational(den)?;
                if d.is_zero() {
                    return None;
                }
                Some(parse_rational(num)? / d)
            }
            _ => None,
        },
    }
}

/// `3`, `3.0`, `0.125` — decimal notation into an exact rational.
fn parse_decimal(text: &str) -> Option<BigRational> {
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(numer * sign, denom))
}

fn parse_bits(sexpr: &Sexpr, width: u32) -> Option<Value> {
    match sexpr {
        Sexpr::Atom(a) => {
            if let Some(hex) = a.strip_prefix("#x") {
                let bits = u64::from_str_radix(hex, 16).ok()?;
                Some(Value::bits(width, bits))
            } else if let Some(bin) = a.strip_prefix("#b") {
                let bits = u64::from_str_radix(bin, 2).ok()?;
                Some(Value::bits(width, bits))
            } else {
                None
            }
        }
        // (_ bvNNN width)
        Sexpr::List(items) => match items.as_slice() {
            [Sexpr::Atom(u), Sexpr::Atom(bv), Sexpr::Atom(_w)] if u == "_" => {
                let digits = bv.strip_prefix("bv")?;
                let bits = digits.parse::<u64>().ok()?;
                Some(Value::bits(width, bits))
            }
            _ => None,
        },
    }
}

fn parse_array(
    sexpr: &Sexpr,
    index: &Sort,
    element: &Sort,
    aux: &BTreeMap<String, &Sexpr>,
) -> Result<Value, String> {
    match sexpr {
        // ((as const (Array ...)) v)
        Sexpr::List(items) => match items.as_slice() {
            [Sexpr::List(as_const), v] if is_as_const(as_const) => {
                let default = value_from_sexpr(v, element, aux)?;
                Ok(Value::Array(ArrayValue {
                    default: Some(Box::new(default)),
                    entries: Vec::new(),
                }))
            }
            // (store inner idx val)
            [Sexpr::Atom(store), inner, idx, val] if store == "store" => {
                let base = parse_array(inner, index, element, aux)?;
                let Value::Array(base) = base else {
                    return Ok(Value::Raw(sexpr.to_string()));
                };
                let idx = value_from_sexpr(idx, index, aux)?;
                let val = value_from_sexpr(val, element, aux)?;
                Ok(Value::Array(base.set(idx, val)))
            }
            // (_ as-array fname)
            [Sexpr::Atom(u), Sexpr::Atom(as_array), Sexpr::Atom(fname)]
                if u == "_" && as_array == "as-array" =>
            {
                match aux.get(fname) {
                    Some(body) => interp_array_fun(body, index, element, aux),
                    None => Ok(Value::Raw(sexpr.to_string())),
                }
            }
            // (lambda ((x S)) body) — newer printers.
            [Sexpr::Atom(lambda), Sexpr::List(_), body] if lambda == "lambda" => {
                interp_array_fun(body, index, element, aux)
            }
            _ => Ok(Value::Raw(sexpr.to_string())),
        },
        Sexpr::Atom(_) => Ok(Value::Raw(sexpr.to_string())),
    }
}

fn is_as_const(items: &[Sexpr]) -> bool {
    matches!(items.first(), Some(Sexpr::Atom(a)) if a == "as")
        && matches!(items.get(1), Some(Sexpr::Atom(c)) if c == "const")
}

/// Interpret an `ite` chain `(ite (= x k) v rest)` as a finite map.
fn interp_array_fun(
    body: &Sexpr,
    index: &Sort,
    element: &Sort,
    aux: &BTreeMap<String, &Sexpr>,
) -> Result<Value, String> {
    let mut entries = Vec::new();
    let mut cursor = body;
    loop {
        match cursor {
            Sexpr::List(items) => match items.as_slice() {
                [Sexpr::Atom(ite), Sexpr::List(cond), then, rest] if ite == "ite" => {
                    let key = match cond.as_slice() {
                        [Sexpr::Atom(eq), _, k] if eq == "=" => k,
                        _ => return Ok(Value::Raw(body.to_string())),
                    };
                    let k = value_from_sexpr(key, index, aux)?;
                    let v = value_from_sexpr(then, element, aux)?;
                    entries.push((k, v));
                    cursor = rest;
                }
                _ => break,
            },
            Sexpr::Atom(_) => break,
        }
    }
    let default = value_from_sexpr(cursor, element, aux)?;
    Ok(Value::Array(ArrayValue {
        default: Some(Box::new(default)),
        entries,
    }))
}
