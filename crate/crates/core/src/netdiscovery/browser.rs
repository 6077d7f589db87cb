use std::process::Command;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrowserError {
    #[error("browser command template is unusable: {0}")]
    Template(String),
    #[error("browser command could not start: {0}")]
    Spawn(String),
    #[error("browser command failed: {0}")]
    Failed(String),
}

/// External downloader for pages that refuse plain HTTP clients. The
/// template is split like a shell command line; `{url}` and `{output}` are
/// replaced in every argument and the command must write the file to
/// `{output}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrowserHook {
    template: String,
}

impl BrowserHook {
    pub fn new(template: &str) -> Result<Self, BrowserError> {
        let parts = shlex::split(template).ok_or_else(|| BrowserError::Template("unbalanced quotes".into()))?;
        if parts.is_empty() {
            return Err(BrowserError::Template("empty command".into()));
        }
        if !template.contains("{url}") || !template.contains("{output}") {
            return Err(BrowserError::Template("must contain {url} and {output}".into()));
        }
        Ok(BrowserHook {
            template: template.to_string(),
        })
    }

    pub fn fetch(&self, url: &str) -> Result<Vec<u8>, BrowserError> {
        let dir = tempfile::tempdir().map_err(|e| BrowserError::Spawn(e.to_string()))?;
        let output = dir.path().join("download");
        let out_str = output.display().to_string();
        let args: Vec<String> = shlex::split(&self.template)
            .unwrap_or_default()
            .into_iter()
            .map(|a| a.replace("{url}", url).replace("{output}", &out_str))
            .collect();
        let status = Command::new(&args[0])
            .args(&args[1..])
            .status()
            .map_err(|e| BrowserError::Spawn(format!("{}: {e}", args[0])))?;
        if !status.success() {
            return Err(BrowserError::Failed(format!("exited with {status}")));
        }
        std::fs::read(&output).map_err(|e| BrowserError::Failed(format!("no output file: {e}")))
    }
}
