//! Exit codes, CSV output and number formatting.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use boundary_reps::{Error, ErrorClass};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_MATH: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn math(message: impl Into<String>) -> Self {
        Failure { code: EXIT_MATH, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Validation => EXIT_VALIDATION,
            ErrorClass::Mathematical => EXIT_MATH,
            ErrorClass::Resource => EXIT_RESOURCE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub trait Context<T> {
    fn context(self, what: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<Failure>> Context<T> for Result<T, E> {
    fn context(self, what: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| {
            let f: Failure = e.into();
            Failure { code: f.code, message: format!("{what}: {}", f.message) }
        })
    }
}

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).context(path.display())
}

/// The `--output` file, or standard output.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).context(p.display())?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_json(path: Option<&Path>, v: &serde_json::Value) -> CliResult<()> {
    let mut out = sink(path)?;
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::validation(e.to_string()))?;
    writeln!(out, "{text}")?;
    out.flush()?;
    Ok(())
}

/// CSV writer preceded by `# key=value` comment lines.
pub fn csv_writer(path: Option<&Path>, header: &[(&str, String)]) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let mut out = sink(path)?;
    let line: Vec<String> = header.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "# {}", line.join(" "))?;
    Ok(csv::Writer::from_writer(out))
}

/// `x` with 15 significant digits, positional for moderate exponents.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.14e}")
    }
}
