//! Drop-in stand-in for the `z3` binary on hosts that do not have one.
//!
//! Reads an SMT-LIB v2 script from stdin (or a file argument), evaluates it
//! with the statically linked Z3, and prints the solver replies to stdout.
//! The flags it understands are the subset the rest of the workspace uses
//! when talking to a real `z3`: `-in`, `-smt2`, `-t:<ms>` and `-version`.

use std::ffi::{CStr, CString};
use std::io::Read;
use std::process::ExitCode;

fn main() -> ExitCode {
    let mut timeout_ms: Option<u64> = None;
    let mut file: Option<String> = None;
    let mut show_version = false;

    for arg in std::env::args().skip(1) {
        if arg == "-version" || arg == "--version" {
            show_version = true;
        } else if let Some(ms) = arg.strip_prefix("-t:") {
            timeout_ms = ms.parse().ok();
        } else if arg.starts_with('-') {
            // -in, -smt2 and anything else the z3 CLI accepts: the script
            // source is decided below, so these are no-ops here.
        } else {
            file = Some(arg);
        }
    }

    if show_version {
        let (mut major, mut minor, mut build, mut rev) = (0u32, 0u32, 0u32, 0u32);
        unsafe { z3_sys::Z3_get_version(&mut major, &mut minor, &mut build, &mut rev) };
        let _ = rev;
        println!("Z3 version {major}.{minor}.{build} - 64 bit - bundled");
        return ExitCode::SUCCESS;
    }

    let mut script = String::new();
    match &file {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(s) => script = s,
            Err(e) => {
                eprintln!("guard-z3: {path}: {e}");
                return ExitCode::from(2);
            }
        },
        None => {
            if std::io::stdin().read_to_string(&mut script).is_err() {
                eprintln!("guard-z3: stdin is not valid UTF-8");
                return ExitCode::from(2);
            }
        }
    }

    let Ok(script) = CString::new(script) else {
        eprintln!("guard-z3: script contains a NUL byte");
        return ExitCode::from(2);
    };

    if let Some(ms) = timeout_ms {
        let key = CString::new("timeout").unwrap();
        let val = CString::new(ms.to_string()).unwrap();
        unsafe { z3_sys::Z3_global_param_set(key.as_ptr(), val.as_ptr()) };
    }

    unsafe {
        let cfg = z3_sys::Z3_mk_config();
        let ctx = z3_sys::Z3_mk_context(cfg);
        z3_sys::Z3_del_config(cfg);
        // The default handler prints `Error: ...` and exits the process,
        // which turns benign script-level errors (such as `get-model` after
        // an unsat answer) into a crash.  Script errors already show up as
        // `(error ...)` lines in the output, so disable the handler.
        z3_sys::Z3_set_error_handler(ctx, None);
        let out = z3_sys::Z3_eval_smtlib2_string(ctx, script.as_ptr());
        if !out.is_null() {
            print!("{}", CStr::from_ptr(out).to_string_lossy());
        }
        z3_sys::Z3_del_context(ctx);
    }
    ExitCode::SUCCESS
}
