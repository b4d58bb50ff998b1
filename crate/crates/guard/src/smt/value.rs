//! Concrete values: literals inside terms, bindings inside models.

use std::fmt;

use num::{BigInt, BigRational, One, Zero};

use super::term::Sort;

/// A concrete SMT value.
///
/// `Bool`, `Int`, `Real`, `Bits` and `Str` are the scalar values that may
/// appear as term literals.  `Array` and `Raw` only show up in models:
/// `Array` is a finite map with an optional default (the solver's `as-array`
/// / `const` encoding), `Raw` preserves any model text we do not interpret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Real(BigRational),
    Bits { width: u32, bits: u64 },
    Str(String),
    Array(ArrayValue),
    Raw(String),
}

/// Finite-map view of an array model value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ArrayValue {
    /// Value at every index not listed in `entries`, when known.
    pub default: Option<Box<Value>>,
    /// Explicit index/value pairs, later entries shadowing earlier ones.
    pub entries: Vec<(Value, Value)>,
}

impl ArrayValue {
    /// Look up `index`, falling back to the default.
    pub fn get(&self, index: &Value) -> Option<&Value> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == index)
            .map(|(_, v)| v)
            .or(self.default.as_deref())
    }

    /// Functional update used by `store` evaluation.
    pub fn set(&self, index: Value, value: Value) -> ArrayValue {
        let mut out = self.clone();
        out.entries.retain(|(k, _)| *k != index);
        out.entries.push((index, value));
        out
    }

    /// Entries that differ from the default, keyed by lexical form.
    fn significant(&self) -> std::collections::BTreeMap<String, String> {
        let default = self.default.as_deref().map(Value::lexical);
        let mut seen = std::collections::BTreeMap::new();
        for (k, v) in &self.entries {
            seen.insert(k.lexical(), v.lexical());
        }
        if let Some(d) = default {
            seen.retain(|_, v| *v != d);
        }
        seen
    }

    /// Extensional equality: same default and same off-default entries.
    pub fn same_mapping(&self, other: &ArrayValue) -> bool {
        self.default.as_deref().map(Value::lexical) == other.default.as_deref().map(Value::lexical)
            && self.significant() == other.significant()
    }
}

impl Value {
    pub fn int<T: Into<BigInt>>(n: T) -> Value {
        Value::Int(n.into())
    }

    pub fn real<T: Into<BigInt>>(num: T, den: T) -> Value {
        Value::Real(BigRational::new(num.into(), den.into()))
    }

    /// Bit-vector value; `bits` is truncated to `width` bits.
    pub fn bits(width: u32, bits: u64) -> Value {
        Value::Bits {
            width,
            bits: truncate(width, bits),
        }
    }

    /// The sort of a scalar value; `None` for `Array`/`Raw` whose element
    /// sorts are not tracked.
    pub fn sort(&self) -> Option<Sort> {
        match self {
            Value::Bool(_) => Some(Sort::Bool),
            Value::Int(_) => Some(Sort::Int),
            Value::Real(_) => Some(Sort::Real),
            Value::Bits { width, .. } => Some(Sort::BitVec(*width)),
            Value::Str(_) => Some(Sort::Str),
            Value::Array(_) | Value::Raw(_) => None,
        }
    }

    /// Sign-extended view of a bit-vector value.
    pub fn bits_signed(&self) -> Option<i64> {
        match *self {
            Value::Bits { width, bits } => Some(to_signed(width, bits)),
            _ => None,
        }
    }

    /// Compact, unambiguous text form.
    ///
    /// Each variant owns a distinct surface shape so that
    /// [`Value::from_lexical`] can reverse the mapping: booleans are
    /// `true`/`false`, integers are bare decimals, rationals always carry a
    /// `/` (`3/1`, `-10/3`), bit-vectors use `#x`/`#b`, strings keep their
    /// SMT-LIB quotes.
    pub fn lexical(&self) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Int(n) => n.to_string(),
            Value::Real(r) => format!("{}/{}", r.numer(), r.denom()),
            Value::Bits { width, bits } => render_bits(*width, *bits),
            Value::Str(s) => quote_string(s),
            Value::Array(a) => {
                let mut parts = Vec::new();
                if let Some(d) = &a.default {
                    parts.push(format!("default={}", d.lexical()));
                }
                for (k, v) in &a.entries {
                    parts.push(format!("[{}]={}", k.lexical(), v.lexical()));
                }
                format!("(array {})", parts.join(" "))
            }
            Value::Raw(s) => s.clone(),
        }
    }

    /// Inverse of [`Value::lexical`] for scalar shapes; anything else
    /// becomes `Raw`.
    pub fn from_lexical(text: &str) -> Value {
        let t = text.trim();
        match t {
            "true" => return Value::Bool(true),
            "false" => return Value::Bool(false),
            _ => {}
        }
        if let Some(hex) = t.strip_prefix("#x") {
            if !hex.is_empty() && hex.chars().all(|c| c.is_ascii_hexdigit()) && hex.len() <= 16 {
                let bits = u64::from_str_radix(hex, 16).unwrap();
                return Value::bits(hex.len() as u32 * 4, bits);
            }
        }
        if let Some(bin) = t.strip_prefix("#b") {
            if !bin.is_empty() && bin.chars().all(|c| c == '0' || c == '1') && bin.len() <= 64 {
                let bits = u64::from_str_radix(bin, 2).unwrap();
                return Value::bits(bin.len() as u32, bits);
            }
        }
        if t.starts_with('"') {
            if let Some(s) = unquote_string(t) {
                return Value::Str(s);
            }
        }
        if let Some((num, den)) = t.split_once('/') {
            if let (Ok(n), Ok(d)) = (num.parse::<BigInt>(), den.parse::<BigInt>()) {
                if !d.is_zero() {
                    return Value::Real(BigRational::new(n, d));
                }
            }
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Value::Int(n);
        }
        Value::Raw(t.to_string())
    }

    /// Human-oriented rendering used in witness text: bit-vectors get both
    /// hex and signed decimal, rationals a decimal hint.
    pub fn describe(&self) -> String {
        match self {
            Value::Bits { width, bits } => {
                let signed = to_signed(*width, *bits);
                format!("{} ({})", render_bits(*width, *bits), signed)
            }
            Value::Real(r) if !r.denom().is_one() => {
                format!("{}/{}", r.numer(), r.denom())
            }
            Value::Real(r) => r.numer().to_string(),
            other => other.lexical(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical())
    }
}

/// Keep only the low `width` bits.
pub(crate) fn truncate(width: u32, bits: u64) -> u64 {
    if width >= 64 {
        bits
    } else {
        bits & ((1u64 << width) - 1)
    }
}

/// Two's-complement interpretation at the given width.
pub(crate) fn to_signed(width: u32, bits: u64) -> i64 {
    let bits = truncate(width, bits);
    if width == 0 || width > 64 {
        return bits as i64;
    }
    let sign = 1u64 << (width - 1);
    if width < 64 && bits & sign != 0 {
        (bits as i64) - ((1i64 << (width - 1)) << 1)
    } else {
        bits as i64
    }
}

/// `#x` form when the width is a whole number of nibbles, `#b` otherwise.
pub(crate) fn render_bits(width: u32, bits: u64) -> String {
    let bits = truncate(width, bits);
    if width % 4 == 0 && width > 0 {
        format!("#x{:0>1$x}", bits, (width / 4) as usize)
    } else {
        format!("#b{:0>1$b}", bits, width.max(1) as usize)
    }
}

/// SMT-LIB string literal: double the quotes, escape everything outside
/// printable ASCII as `\u{..}`.
pub(crate) fn quote_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\"\""),
            '\\' => out.push_str("\\u{5c}"),
            c if (' '..='~').contains(&c) => out.push(c),
            c => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
        }
    }
    out.push('"');
    out
}

/// Undo [`quote_string`], also accepting solver output that uses the same
/// SMT-LIB conventions.  Returns `None` if the text is not a closed literal.
pub(crate) fn unquote_string(text: &str) -> Option<String> {
    let inner = text.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '"' {
            // Only a doubled quote may appear inside.
            if chars.next() != Some('"') {
                return None;
            }
            out.push('"');
        } else if c == '\\' && chars.peek() == Some(&'u') {
            chars.next();
            let mut hex = String::new();
            if chars.peek() == Some(&'{') {
                chars.next();
                for h in chars.by_ref() {
                    if h == '}' {
                        break;
                    }
                    hex.push(h);
                }
            } else {
                // \uXXXX short form.
                for _ in 0..4 {
                    hex.push(chars.next()?);
                }
            }
            let code = u32::from_str_radix(&hex, 16).ok()?;
            out.push(char::from_u32(code)?);
        } else {
            out.push(c);
        }
    }
    Some(out)
}
