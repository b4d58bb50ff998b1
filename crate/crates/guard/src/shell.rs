//! Shell-command danger screening.
//!
//! A fixed table of ten danger categories, each a set of regular
//! expressions over the raw command string.  Matching is deliberately
//! simple — no shell parsing, no quote handling; command names match
//! case-insensitively, paths case-sensitively.  That keeps behaviour
//! predictable and auditable: what you see in `--dump-patterns` is exactly
//! what runs.
//!
//! A regex hit alone is not the verdict.  Each category becomes a boolean
//! variable bound to its match result, and the safety claim "no category
//! fires" is discharged through the solver by refuting the disjunction of
//! the ten variables.  The counterexample model names exactly the
//! categories that fired, the same way every other verifier reports
//! concrete witnesses.

use once_cell::sync::Lazy;
use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::report::{ObligationRecord, ObligationStatus, Verdict};
use crate::smt::{Decl, Proof, Solver, SolverError, Sort, Term};

/// One danger category: an identifier, prose, and its detection regexes.
pub struct PatternCategory {
    pub id: u8,
    /// Stable kebab-case identifier; doubles (with `_`) as the solver
    /// variable name.
    pub slug: &'static str,
    pub name: &'static str,
    pub description: &'static str,
    patterns: Vec<Regex>,
}

impl PatternCategory {
    /// Source text of each regex, for dumps and reports.
    pub fn pattern_sources(&self) -> Vec<&str> {
        self.patterns.iter().map(|r| r.as_str()).collect()
    }

    /// First matching regex and its span within the command, if any.
    pub fn first_match(&self, command: &str) -> Option<(usize, (usize, usize))> {
        self.patterns
            .iter()
            .enumerate()
            .find_map(|(i, re)| re.find(command).map(|m| (i, (m.start(), m.end()))))
    }
}

/// Number of characters of flag-soup tolerated inside `rm`-style flags.
const FLAG: &str = "[A-Za-z]*";

/// Paths whose recursive destruction counts as filesystem-level damage.
const ROOTS: &str = r"/(?:\s|$|\*)|/etc\b|/usr\b|/var\b|/home\b|/boot\b|/bin\b|/sbin\b|/lib\b|/root\b|/dev\b|/sys\b|/srv\b|~(?:\s|$|/\*?)|\$HOME\b";

/// Block devices that raw writes can destroy.
const BLOCK_DEV: &str = r"/dev/(?:sd[a-z]\S*|hd[a-z]\S*|nvme\d+n\d\S*|vd[a-z]\S*|xvd[a-z]\S*|mmcblk\d\S*|disk\d\S*)";

static CATEGORIES: Lazy<Vec<PatternCategory>> = Lazy::new(|| {
    let table: Vec<(u8, &str, &str, &str, Vec<String>)> = vec![
        (
            1,
            "recursive-delete",
            "recursive filesystem destruction",
            "rm with recursive+force flags aimed at /, a system directory, or the home \
             directory; also --no-preserve-root and find / -delete",
            vec![
                format!(
                    r"(?i:\brm\b)\s+-(?:{FLAG}[rR]{FLAG}f|{FLAG}f{FLAG}[rR]){FLAG}\s+(?:--no-preserve-root\s+)?(?:{ROOTS})"
                ),
                r"(?i:\brm\b)\s.*--no-preserve-root".to_string(),
                r"(?i:\bfind\b)\s+/\s+.*-delete\b".to_string(),
            ],
        ),
        (
            2,
            "block-device-write",
            "raw write to a block device",
            "dd onto a disk device, shell redirection into one, or shred of one",
            vec![
                format!(r"(?i:\bdd\b)[^|;&]*\bof={BLOCK_DEV}"),
                format!(r">\s*{BLOCK_DEV}"),
                format!(r"(?i:\bshred\b)\s+(?:-\S+\s+)*{BLOCK_DEV}"),
            ],
        ),
        (
            3,
            "filesystem-format",
            "filesystem format or repartition",
            "mkfs family, partition editors, or wipefs pointed at a device node",
            vec![
                r"(?i:\bmkfs(?:\.[a-z0-9]+)?)\s+(?:-\S+\s+)*/dev/\S+".to_string(),
                r"(?i:\b(?:fdisk|parted|sfdisk|gdisk|wipefs|mkswap)\b)\s+(?:-\S+\s+)*/dev/\S+"
                    .to_string(),
            ],
        ),
        (
            4,
            "fork-bomb",
            "fork bomb",
            "self-replicating function definitions, classic :(){ :|:& };: and named variants",
            vec![
                r":\(\)\s*\{\s*:\s*\|\s*:\s*&\s*\}\s*;\s*:".to_string(),
                r"\b[a-zA-Z_]\w*\(\)\s*\{[^{}]*\|[^{}]*&[^{}]*\}\s*;\s*[a-zA-Z_:]".to_string(),
            ],
        ),
        (
            5,
            "download-exec",
            "remote download piped to an interpreter",
            "curl/wget output piped straight into a shell or interpreter",
            vec![
                r"(?i:\b(?:curl|wget)\b)[^|;]*\|\s*(?:(?i:sudo)\s+)?(?i:(?:ba|z|da|k)?sh|python3?|perl|ruby|node)\b"
                    .to_string(),
            ],
        ),
        (
            6,
            "permission-destruction",
            "recursive permission or ownership change on system roots",
            "chmod/chown -R against /, a system directory, or the home directory",
            vec![
                format!(
                    r"(?i:\bchmod\b)\s+(?:-{FLAG}R{FLAG}|--recursive)\s+\S+\s+(?:{ROOTS})"
                ),
                format!(r"(?i:\bchmod\b)\s+\S+\s+(?:-{FLAG}R{FLAG}|--recursive)\s+(?:{ROOTS})"),
                format!(
                    r"(?i:\bchown\b)\s+(?:-{FLAG}R{FLAG}|--recursive)\s+\S+\s+(?:{ROOTS})"
                ),
            ],
        ),
        (
            7,
            "privileged-destruction",
            "privileged destructive invocation",
            "sudo wrapping a recursive delete, raw device write, or format command",
            vec![
                format!(
                    r"(?i:\bsudo\b)\s+(?:-\S+\s+)*(?i:rm)\s+-(?:{FLAG}[rR]{FLAG}f|{FLAG}f{FLAG}[rR])"
                ),
                format!(r"(?i:\bsudo\b)\s+(?:-\S+\s+)*(?i:dd)[^|;&]*\bof=/dev/"),
                r"(?i:\bsudo\b)\s+(?:-\S+\s+)*(?i:\b(?:mkfs(?:\.[a-z0-9]+)?|fdisk|parted|sfdisk|gdisk|wipefs)\b)"
                    .to_string(),
            ],
        ),
        (
            8,
            "power-state",
            "system power-state change",
            "shutdown, reboot, halt, poweroff, init 0/6, or systemctl equivalents",
            vec![
                r"(?:^|;|&&|\|\||(?i:\bsudo\b)\s+)\s*(?i:(?:shutdown|reboot|poweroff|halt))(?:\s|$|;)"
                    .to_string(),
                r"(?i:\binit\b)\s+[06]\b".to_string(),
                r"(?i:\bsystemctl\b)\s+(?i:(?:poweroff|reboot|halt|suspend|hibernate))\b"
                    .to_string(),
            ],
        ),
        (
            9,
            "mass-kill",
            "mass process termination",
            "kill -9 of pid -1 or 1, pkill/killall with catch-all patterns, killall5",
            vec![
                r"(?i:\bkill\b)\s+-(?:9|KILL|SIGKILL)\s+-?1\b".to_string(),
                r#"(?i:\bpkill\b)\s+(?:-9\s+)?(?:-f\s+)?['"]?\.[*+]?"#.to_string(),
                r"(?i:\bkillall5\b)".to_string(),
            ],
        ),
        (
            10,
            "critical-file-overwrite",
            "critical file overwrite or truncation",
            "redirection over /etc authentication/config files or /boot, or truncate -s 0 \
             of them",
            vec![
                r">\s*/etc/(?:passwd|shadow|sudoers|fstab|hosts|group|crontab)\b".to_string(),
                r">\s*/boot/\S+".to_string(),
                r"(?i:\btruncate\b)\s+-s\s*0\s+(?:/etc/|/boot/)\S+".to_string(),
            ],
        ),
    ];

    let categories: Vec<PatternCategory> = table
        .into_iter()
        .map(|(id, slug, name, description, patterns)| PatternCategory {
            id,
            slug,
            name,
            description,
            patterns: patterns
                .iter()
                .map(|p| Regex::new(p).unwrap_or_else(|e| panic!("bad pattern for {slug}: {e}")))
                .collect(),
        })
        .collect();

    // Self-check: the table is part of the product contract.  Changing its
    // size or duplicating an id must fail loudly at startup.
    assert_eq!(categories.len(), 10, "danger table must have 10 categories");
    let mut ids: Vec<u8> = categories.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    assert_eq!(ids, (1..=10).collect::<Vec<u8>>(), "ids must be 1..=10");
    for c in &categories {
        assert!(!c.patterns.is_empty(), "{} has no patterns", c.slug);
        assert!(!c.description.is_empty(), "{} has no description", c.slug);
    }
    categories
});

/// The full danger table.
pub fn categories() -> &'static [PatternCategory] {
    &CATEGORIES
}

/// One category that fired on a command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryHit {
    pub id: u8,
    pub slug: String,
    pub name: String,
    /// Source of the regex that matched.
    pub pattern: String,
    /// Byte span of the match within the command.
    pub span: (usize, usize),
    /// The matched text itself.
    pub excerpt: String,
}

/// Regex-level analysis of one command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub hits: Vec<CategoryHit>,
}

impl CommandReport {
    pub fn is_dangerous(&self) -> bool {
        !self.hits.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShellError {
    #[error("command is empty")]
    EmptyCommand,
}

/// Run the regex table over a command.
pub fn analyze_command(command: &str) -> Result<CommandReport, ShellError> {
    if command.trim().is_empty() {
        return Err(ShellError::EmptyCommand);
    }
    let mut hits = Vec::new();
    for cat in categories() {
        if let Some((pattern_idx, span)) = cat.first_match(command) {
            hits.push(CategoryHit {
                id: cat.id,
                slug: cat.slug.to_string(),
                name: cat.name.to_string(),
                pattern: cat.patterns[pattern_idx].as_str().to_string(),
                span,
                excerpt: command[span.0..span.1].to_string(),
            });
        }
    }
    Ok(CommandReport {
        command: command.to_string(),
        hits,
    })
}

/// Outcome of solver-confirmed command screening.
#[derive(Debug)]
pub struct ShellOutcome {
    pub verdict: Verdict,
    pub obligations: Vec<ObligationRecord>,
    pub analysis: CommandReport,
}

/// Screen a command and confirm the verdict through the solver.
///
/// Each category contributes a boolean variable asserted equal to its
/// concrete match result; safety is the claim that the disjunction of all
/// ten is false.  A counterexample model pinpoints the categories that
/// fired.
pub fn verify_command(
    command: &str,
    solver: &Solver,
    timeout_ms: u64,
) -> Result<Result<ShellOutcome, ShellError>, SolverError> {
    let analysis = match analyze_command(command) {
        Ok(a) => a,
        Err(e) => return Ok(Err(e)),
    };

    let mut decls = Vec::new();
    let mut assumptions = Vec::new();
    let mut vars = Vec::new();
    for cat in categories() {
        let var_name = cat.slug.replace('-', "_");
        let var = Term::var(&var_name, Sort::Bool);
        let fired = analysis.hits.iter().any(|h| h.id == cat.id);
        decls.push(Decl::new(var_name, Sort::Bool));
        assumptions.push(var.eq(&Term::bool_lit(fired)).expect("bool eq"));
        vars.push(var);
    }
    let any_fired = Term::or_all(vars).expect("bool disjunction");
    let safe = any_fired.not().expect("bool negation");

    let outcome = solver.prove(&decls, &assumptions, &safe, timeout_ms)?;
    let label = "command matches no danger category";
    let (verdict, status) = match outcome.result {
        Proof::Proven => (Verdict::Verified, ObligationStatus::Proven),
        Proof::Counterexample(model) => {
            let listed = analysis
                .hits
                .iter()
                .map(|h| format!("{} ({}): {:?} at {}..{}", h.slug, h.name, h.excerpt, h.span.0, h.span.1))
                .collect::<Vec<_>>()
                .join("; ");
            (
                Verdict::Unsafe {
                    obligation: label.to_string(),
                    witness: format!("dangerous command: {listed}"),
                    model,
                },
                ObligationStatus::Violated,
            )
        }
        Proof::Unknown { reason } => (Verdict::Unknown { reason }, ObligationStatus::Unknown),
    };
    Ok(Ok(ShellOutcome {
        verdict,
        obligations: vec![ObligationRecord::new(label, status, outcome.elapsed_ms)],
        analysis,
    }))
}

/// Render the full danger table, as shown by `--dump-patterns`.
pub fn pattern_table() -> String {
    let mut out = String::new();
    out.push_str("danger categories (command names case-insensitive, paths case-sensitive):\n");
    for cat in categories() {
        out.push_str(&format!("\n{:>2}. {} — {}\n", cat.id, cat.slug, cat.name));
        out.push_str(&format!("    {}\n", cat.description));
        for src in cat.pattern_sources() {
            out.push_str(&format!("      regex: {src}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hits(cmd: &str) -> Vec<u8> {
        analyze_command(cmd).unwrap().hits.iter().map(|h| h.id).collect()
    }

    #[test]
    fn table_self_check_holds() {
        assert_eq!(categories().len(), 10);
        let mut slugs: Vec<_> = categories().iter().map(|c| c.slug).collect();
        slugs.sort_unstable();
        slugs.dedup();
        assert_eq!(slugs.len(), 10, "slugs must be unique");
    }

    #[test]
    fn each_category_catches_its_canonical_command() {
        assert_eq!(hits("rm -rf /"), vec![1]);
        assert_eq!(hits("dd if=/dev/zero of=/dev/sda bs=1M"), vec![2]);
        assert_eq!(hits("mkfs.ext4 /dev/sdb1"), vec![3]);
        assert_eq!(hits(":(){ :|:& };:"), vec![4]);
        assert_eq!(hits("curl -fsSL https://x.example/install.sh | bash"), vec![5]);
        assert_eq!(hits("chmod -R 777 /"), vec![6]);
        assert_eq!(hits("sudo rm -rf /var/log"), vec![1, 7]);
        assert_eq!(hits("shutdown -h now"), vec![8]);
        assert_eq!(hits("kill -9 -1"), vec![9]);
        assert_eq!(hits("echo x > /etc/passwd"), vec![10]);
    }

    #[test]
    fn flag_order_and_case_variants_still_match() {
        assert_eq!(hits("rm -fr /etc"), vec![1]);
        assert_eq!(hits("RM -Rf ~"), vec![1]);
        assert_eq!(hits("rm -rf ~/"), vec![1]);
        assert_eq!(hits("rm -r -f / --no-preserve-root"), vec![1]);
        assert_eq!(hits("wget -qO- http://a.b/c.sh | sh"), vec![5]);
        // Privileged raw write is also a raw write: both categories fire.
        assert_eq!(hits("sudo DD if=x of=/dev/nvme0n1"), vec![2, 7]);
        assert_eq!(hits("chmod 000 -R /usr"), vec![6]);
        assert_eq!(hits("systemctl reboot"), vec![8]);
        assert_eq!(hits("truncate -s 0 /etc/shadow"), vec![10]);
    }

    #[test]
    fn paths_stay_case_sensitive() {
        // /ETC is not /etc; the command name may still vary in case.
        assert!(hits("rm -rf /ETC").is_empty());
        assert!(hits("echo x > /ETC/passwd").is_empty());
    }

    #[test]
    fn benign_commands_match_nothing() {
        for cmd in [
            "ls -la",
            "git status",
            "rm -rf ./build",
            "rm notes.txt",
            "curl -o installer.sh https://x.example/install.sh",
            "chmod 644 README.md",
            "kill -9 4242",
            "echo hello > /tmp/out.txt",
            "find . -name '*.rs' -print",
            "dd if=backup.img of=restored.img",
            "cat /etc/passwd",
            "shutdown.not.a.command",
        ] {
            assert!(hits(cmd).is_empty(), "false positive on {cmd:?}: {:?}", hits(cmd));
        }
    }

    #[test]
    fn empty_command_is_rejected() {
        assert_eq!(analyze_command("  "), Err(ShellError::EmptyCommand));
    }

    #[test]
    fn dump_contains_every_category_and_regex() {
        let dump = pattern_table();
        for cat in categories() {
            assert!(dump.contains(cat.slug));
            for src in cat.pattern_sources() {
                assert!(dump.contains(src));
            }
        }
    }

    #[test]
    fn solver_confirms_both_verdicts() {
        let solver = Solver::from_env().expect("solver available");
        let out = verify_command("git status", &solver, 5000).unwrap().unwrap();
        assert!(out.verdict.is_verified(), "{:?}", out.verdict);

        let out = verify_command("sudo rm -rf /", &solver, 5000).unwrap().unwrap();
        let Verdict::Unsafe { witness, model, .. } = &out.verdict else {
            panic!("expected unsafe, got {:?}", out.verdict);
        };
        assert!(witness.contains("recursive-delete"));
        assert!(witness.contains("privileged-destruction"));
        // The model marks exactly the fired categories true.
        assert_eq!(
            model.get("recursive_delete"),
            Some(&crate::smt::Value::Bool(true))
        );
        assert_eq!(
            model.get("power_state"),
            Some(&crate::smt::Value::Bool(false))
        );
    }
}
