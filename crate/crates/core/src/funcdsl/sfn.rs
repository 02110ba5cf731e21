use std::sync::Arc;

use super::{parse, FunctionExpr};
use crate::qspan::Basis;

/// Contents of a `.sfn` file: optional basis declarations (`name = ...`
/// lines) followed by exactly one expression line. `#` starts a comment.
#[derive(Clone, Debug)]
pub struct SfnFile {
    pub basis: Option<Arc<Basis>>,
    pub expr: FunctionExpr,
}

impl SfnFile {
    pub fn parse(text: &str) -> Result<SfnFile, String> {
        let mut decls = String::new();
        let mut expr = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                decls.push('\n');
                continue;
            }
            if line.contains('=') {
                decls.push_str(line);
                decls.push('\n');
                continue;
            }
            decls.push('\n');
            if expr.is_some() {
                return Err(format!("line {}: more than one expression", i + 1));
            }
            expr = Some(parse(line).map_err(|e| format!("line {}: {}", i + 1, e))?);
        }
        let expr = expr.ok_or_else(|| "no expression found".to_string())?;
        let basis = if decls.trim().is_empty() {
            None
        } else {
            Some(Basis::parse(&decls).map_err(|e| e.to_string())?)
        };
        Ok(SfnFile { basis, expr })
    }
}
