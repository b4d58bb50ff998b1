//! Proving tool-call definitions can never produce forbidden output.
//!
//! A tool definition describes an invocation template and its parameters:
//! enumerations, bounded integers, and strings with optional length and
//! character-set constraints.  Forbidden patterns state what the rendered
//! template (or an individual parameter) must never contain, equal, or
//! start with.  Each pattern becomes one satisfiability query over the
//! string theory: a model is a concrete choice of parameter values that
//! produces the forbidden text, and no model means the pattern is
//! impossible by construction.
//!
//! The flip side is diagnosability: an unconstrained string parameter can
//! hold anything, so nothing useful can be proven about it.
//! [`explain_unverifiability`] names such parameters and the constraint to
//! add.

use serde::Deserialize;
use thiserror::Error;

use crate::report::{ObligationRecord, ObligationStatus, Verdict};
use crate::smt::{Charset, Decl, Model, SatResult, Solver, SolverError, Sort, Term, Value};

/// A tool-call definition, as read from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolDefinition {
    pub name: String,
    /// Invocation template with `{param}` placeholders.
    #[serde(default)]
    pub template: Option<String>,
    #[serde(default)]
    pub params: Vec<ParamDef>,
    #[serde(default)]
    pub forbidden: Vec<ForbiddenPattern>,
}

/// One declared parameter.
// No `deny_unknown_fields` here: serde cannot combine it with `flatten`.
#[derive(Debug, Clone, Deserialize)]
pub struct ParamDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
}

/// Parameter shapes.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ParamKind {
    /// One of a fixed set of literal strings.
    Enum { values: Vec<String> },
    /// An integer within an inclusive range.
    Int { lo: i64, hi: i64 },
    /// Free text, optionally bounded in length and character set.
    #[serde(rename = "string")]
    Str {
        #[serde(default)]
        max_len: Option<u64>,
        #[serde(default)]
        charset: Option<String>,
    },
}

/// What a parameter or the rendered template must never look like.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForbiddenPattern {
    pub kind: PatternKind,
    pub value: String,
    /// `"template"` or a parameter name.
    pub applies_to: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Contains,
    Equals,
    Prefix,
}

impl PatternKind {
    fn describe(&self) -> &'static str {
        match self {
            PatternKind::Contains => "contains",
            PatternKind::Equals => "equals",
            PatternKind::Prefix => "starts with",
        }
    }
}

/// Definition-level errors: malformed JSON or an inconsistent definition.
#[derive(Debug, Error)]
pub enum ToolError {
    #[error("tool definition is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid tool definition: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ToolError {
    ToolError::Invalid(msg.into())
}

/// Parse and validate a JSON tool definition.
pub fn parse_definition(text: &str) -> Result<ToolDefinition, ToolError> {
    let def: ToolDefinition = serde_json::from_str(text)?;
    validate(&def)?;
    Ok(def)
}

fn validate(def: &ToolDefinition) -> Result<(), ToolError> {
    if def.name.trim().is_empty() {
        return Err(invalid("tool name is empty"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for p in &def.params {
        if !seen.insert(p.name.as_str()) {
            return Err(invalid(format!("duplicate parameter {:?}", p.name)));
        }
        match &p.kind {
            ParamKind::Enum { values } => {
                if values.is_empty() {
                    return Err(invalid(format!("enum parameter {:?} has no values", p.name)));
                }
            }
            ParamKind::Int { lo, hi } => {
                if lo > hi {
                    return Err(invalid(format!(
                        "int parameter {:?} has an empty range [{lo}, {hi}]",
                        p.name
                    )));
                }
            }
            ParamKind::Str { charset, .. } => {
                if let Some(cs) = charset {
                    Charset::parse(cs).map_err(|e| {
                        invalid(format!("parameter {:?} charset: {e}", p.name))
                    })?;
                }
            }
        }
    }
    if let Some(template) = &def.template {
        // Referenced placeholders must name declared parameters.
        for chunk in parse_template(template)? {
            if let Chunk::Param(name) = chunk {
                if !def.params.iter().any(|p| p.name == name) {
                    return Err(invalid(format!(
                        "template references undeclared parameter {name:?}"
                    )));
                }
            }
        }
    }
    for f in &def.forbidden {
        if f.value.is_empty() {
            return Err(invalid("forbidden pattern with empty value"));
        }
        if f.applies_to == "template" {
            if def.template.is_none() {
                return Err(invalid(
                    "pattern applies to the template, but no template is defined",
                ));
            }
        } else {
            let Some(param) = def.params.iter().find(|p| p.name == f.applies_to) else {
                return Err(invalid(format!(
                    "pattern applies to unknown parameter {:?}",
                    f.applies_to
                )));
            };
            if matches!(param.kind, ParamKind::Int { .. }) {
                return Err(invalid(format!(
                    "pattern applies to integer parameter {:?}; string patterns only \
                     constrain enum and string parameters",
                    f.applies_to
                )));
            }
        }
    }
    Ok(())
}

/// A template split into literal text and parameter references.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Chunk {
    Literal(String),
    Param(String),
}

fn parse_template(template: &str) -> Result<Vec<Chunk>, ToolError> {
    let mut chunks = Vec::new();
    let mut literal = String::new();
    let mut chars = template.chars();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                if !literal.is_empty() {
                    chunks.push(Chunk::Literal(std::mem::take(&mut literal)));
                }
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(c) if c.is_ascii_alphanumeric() || c == '_' => name.push(c),
                        Some(c) => {
                            return Err(invalid(format!(
                                "unexpected {c:?} inside a template placeholder"
                            )))
                        }
                        None => return Err(invalid("unclosed '{' in template")),
                    }
                }
                if name.is_empty() {
                    return Err(invalid("empty placeholder in template"));
                }
                chunks.push(Chunk::Param(name));
            }
            '}' => return Err(invalid("unmatched '}' in template")),
            c => literal.push(c),
        }
    }
    if !literal.is_empty() {
        chunks.push(Chunk::Literal(literal));
    }
    Ok(chunks)
}

/// Why a definition cannot be fully verified, and how to fix it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Finding {
    pub param: String,
    pub missing: Vec<String>,
    pub recommendation: String,
}

/// Name every string parameter with neither a length bound nor a charset.
/// Either constraint alone can make a pattern refutable; a parameter with
/// both absent can take any value, so no forbidden-text proof about it can
/// ever succeed.
pub fn explain_unverifiability(def: &ToolDefinition) -> Vec<Finding> {
    let mut findings = Vec::new();
    for p in &def.params {
        if let ParamKind::Str {
            max_len: None,
            charset: None,
        } = &p.kind
        {
            let missing = vec!["max_len".to_string(), "charset".to_string()];
            findings.push(Finding {
                recommendation: format!(
                    "add {} to parameter {:?} so the solver can rule out forbidden text",
                    missing.join(" or "),
                    p.name
                ),
                param: p.name.clone(),
                missing,
            });
        }
    }
    findings
}

/// Verification outcome plus the diagnosability findings.
#[derive(Debug)]
pub struct ToolOutcome {
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
    pub findings: Vec<Finding>,
}

/// Check every forbidden pattern against the definition.
pub fn verify_tool(
    def: &ToolDefinition,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<ToolOutcome, SolverError> {
    let findings = explain_unverifiability(def);

    // Declarations and range/shape assumptions for every parameter.
    let mut decls = Vec::new();
    let mut assumptions = Vec::new();
    for p in &def.params {
        match &p.kind {
            ParamKind::Enum { values } => {
                let var = Term::var(&p.name, Sort::Str);
                decls.push(Decl::new(&p.name, Sort::Str));
                let cases = values
                    .iter()
                    .map(|v| var.eq(&Term::str_lit(v.clone())).expect("string eq"))
                    .collect();
                assumptions.push(Term::or_all(cases).expect("enum case split"));
            }
            ParamKind::Int { lo, hi } => {
                let var = Term::var(&p.name, Sort::Int);
                decls.push(Decl::new(&p.name, Sort::Int));
                assumptions.push(var.ge(&Term::int(*lo)).expect("int bound"));
                assumptions.push(var.le(&Term::int(*hi)).expect("int bound"));
            }
            ParamKind::Str { max_len, charset } => {
                let var = Term::var(&p.name, Sort::Str);
                decls.push(Decl::new(&p.name, Sort::Str));
                if let Some(n) = max_len {
                    assumptions.push(
                        var.str_len()
                            .expect("length")
                            .le(&Term::int(*n as i64))
                            .expect("length bound"),
                    );
                }
                if let Some(cs) = charset {
                    let cs = Charset::parse(cs).expect("validated charset");
                    assumptions.push(var.in_charset(cs).expect("charset membership"));
                }
            }
        }
    }

    // The template as a string term, unless it pulls in an integer
    // parameter — rendering integers into strings is outside the fragment.
    let template_term: Option<Result<Term, String>> = def.template.as_ref().map(|t| {
        let chunks = parse_template(t).expect("validated template");
        let mut parts = Vec::new();
        for chunk in chunks {
            match chunk {
                Chunk::Literal(text) => parts.push(Term::str_lit(text)),
                Chunk::Param(name) => {
                    let p = def.params.iter().find(|p| p.name == name).expect("validated");
                    if matches!(p.kind, ParamKind::Int { .. }) {
                        return Err(name);
                    }
                    parts.push(Term::var(&name, Sort::Str));
                }
            }
        }
        Ok(Term::str_concat(parts).expect("string concat"))
    });

    let mut verdict = Verdict::Verified;
    let mut obligations = Vec::new();

    for f in &def.forbidden {
        let label = format!(
            "{} never {} {:?}",
            if f.applies_to == "template" {
                "rendered template".to_string()
            } else {
                format!("parameter {}", f.applies_to)
            },
            f.kind.describe(),
            f.value
        );

        let target = if f.applies_to == "template" {
            match template_term.as_ref().expect("validated: template exists") {
                Ok(t) => t.clone(),
                Err(int_param) => {
                    return Ok(ToolOutcome {
                        verdict: Verdict::Unsupported {
                            feature: format!(
                                "integer parameter {int_param:?} rendered into a template \
                                 checked by a string pattern"
                            ),
                        },
                        obligations,
                        findings,
                    })
                }
            }
        } else {
            Term::var(&f.applies_to, Sort::Str)
        };

        let value = Term::str_lit(f.value.clone());
        let pattern_holds = match f.kind {
            PatternKind::Contains => target.str_contains(&value).expect("string op"),
            PatternKind::Equals => target.eq(&value).expect("string eq"),
            PatternKind::Prefix => value.str_prefix_of(&target).expect("string op"),
        };

        let mut query = assumptions.clone();
        query.push(pattern_holds);
        let outcome = solver.check_sat(&decls, &query, timeout_ms)?;
        let status = match outcome.result {
            SatResult::Unsat => ObligationStatus::Proven,
            SatResult::Sat(model) => {
                if verdict.is_verified() {
                    verdict = Verdict::Unsafe {
                        obligation: label.clone(),
                        witness: witness_text(def, f, &model),
                        model: model_for_params(def, &model),
                    };
                }
                ObligationStatus::Violated
            }
            SatResult::Unknown { reason } => {
                if verdict.is_verified() {
                    verdict = Verdict::Unknown {
                        reason: format!("{label}: {reason}"),
                    };
                }
                ObligationStatus::Unknown
            }
        };
        obligations.push(ObligationRecord::new(label, status, outcome.elapsed_ms));
    }

    Ok(ToolOutcome {
        verdict,
        obligations,
        findings,
    })
}

/// Substitute model values into the template.
pub fn render_template(def: &ToolDefinition, model: &Model) -> Option<String> {
    let template = def.template.as_ref()?;
    let chunks = parse_template(template).ok()?;
    let mut out = String::new();
    for chunk in chunks {
        match chunk {
            Chunk::Literal(text) => out.push_str(&text),
            Chunk::Param(name) => match model.get(&name) {
                Some(Value::Str(s)) => out.push_str(s),
                Some(Value::Int(n)) => out.push_str(&n.to_string()),
                Some(other) => out.push_str(&other.lexical()),
                None => return None,
            },
        }
    }
    Some(out)
}

fn witness_text(def: &ToolDefinition, pattern: &ForbiddenPattern, model: &Model) -> String {
    if pattern.applies_to == "template" {
        match render_template(def, model) {
            Some(rendered) => format!(
                "parameter choice renders the template as {rendered:?}, which {} {:?}",
                pattern.kind.describe(),
                pattern.value
            ),
            None => format!(
                "a parameter choice renders a template that {} {:?}",
                pattern.kind.describe(),
                pattern.value
            ),
        }
    } else {
        let value = model
            .get(&pattern.applies_to)
            .map(|v| v.describe())
            .unwrap_or_else(|| "?".to_string());
        format!(
            "parameter {} = {value} {} {:?}",
            pattern.applies_to,
            pattern.kind.describe(),
            pattern.value
        )
    }
}

/// Restrict a model to the declared parameters (drops solver helpers).
fn model_for_params(def: &ToolDefinition, model: &Model) -> Model {
    let mut out = Model::new();
    for p in &def.params {
        if let Some(v) = model.get(&p.name) {
            out.insert(p.name.clone(), v.clone());
        }
    }
    out
}
