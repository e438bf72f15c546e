//! Result formatting and atomic file output.

use std::fs;
use std::path::Path;

use symdisc::C64;

use crate::Failure;

/// 12 significant digits, the stable sweep-CSV float format.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn fmt_c(z: C64) -> String {
    format!("{:.11e}{:+.11e}i", z.re, z.im)
}

/// Print to stdout, or write the whole file at once: content goes to a
/// sibling temp file first and is renamed into place, so a failed run
/// never leaves a partial artifact behind.
pub fn emit(target: Option<&Path>, text: &str) -> Result<(), Failure> {
    let Some(path) = target else {
        print!("{text}");
        return Ok(());
    };
    let name = path
        .file_name()
        .ok_or_else(|| Failure::Config(format!("invalid output path {}", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, text)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::Config(format!("cannot move output into {}: {e}", path.display()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_twelve_significant_digits() {
        assert_eq!(fmt_f(0.875), "8.75000000000e-1");
        assert_eq!(fmt_f(0.0), "0.00000000000e0");
        assert_eq!(fmt_c(C64::new(1.0, -0.5)), "1.00000000000e0-5.00000000000e-1i");
    }

    #[test]
    fn emit_writes_atomically() {
        let dir = std::env::temp_dir().join(format!("symdisc-emit-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.csv");
        emit(Some(&path), "a,b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n");
        assert!(!dir.join("out.csv.tmp").exists());
        emit(Some(&path), "c,d\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "c,d\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}
