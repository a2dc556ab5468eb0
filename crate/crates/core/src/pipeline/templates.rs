//! Prompt templates. Defaults ship in `templates/`; a directory of same-named
//! files overrides them one by one. Lines starting with `## ` are comments.

use std::path::Path;

use super::PipelineError;

pub const TEMPLATE_SET_VERSION: u32 = 1;

macro_rules! template_set {
    ($($field:ident => $file:literal),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct Templates {
            $(pub $field: String,)*
        }

        impl Default for Templates {
            fn default() -> Self {
                Self {
                    $($field: strip_comments(include_str!(concat!("../../templates/", $file))),)*
                }
            }
        }

        impl Templates {
            /// Defaults, overridden by any same-named file in `dir`.
            pub fn load_dir(dir: &Path) -> Result<Self, PipelineError> {
                let mut t = Self::default();
                $(
                    let path = dir.join($file);
                    if path.is_file() {
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
                        t.$field = strip_comments(&text);
                    }
                )*
                Ok(t)
            }

            pub const FILES: &'static [&'static str] = &[$($file),*];
        }
    };
}

template_set! {
    classifier_system => "classifier.system.txt",
    classifier_user => "classifier.user.txt",
    interpreter_system => "interpreter.system.txt",
    interpreter_user => "interpreter.user.txt",
    interpreter_hints => "interpreter.hints.txt",
    synthesizer_system => "synthesizer.system.txt",
    synthesizer_read => "synthesizer.read.txt",
    synthesizer_final => "synthesizer.final.txt",
    validator_system => "validator.system.txt",
    validator_user => "validator.user.txt",
    repair => "repair.txt",
    eval_system => "eval.system.txt",
    eval_base => "eval.base.txt",
    eval_rag => "eval.rag.txt",
}

fn strip_comments(text: &str) -> String {
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("## ")).collect();
    kept.join("\n").trim_end().to_string()
}

/// Replaces every `{{key}}` with its value. Values are inserted verbatim.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        match after.find("}}") {
            Some(close) => {
                let key = &after[..close];
                match vars.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push_str("{{");
                        out.push_str(key);
                        out.push_str("}}");
                    }
                }
                rest = &after[close + 2..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_substitutes_once() {
        let out = render("a {{x}} b {{y}} {{missing}}", &[("x", "{{y}}"), ("y", "2")]);
        assert_eq!(out, "a {{y}} b 2 {{missing}}");
        assert_eq!(render("no close {{x", &[("x", "1")]), "no close {{x");
    }

    #[test]
    fn defaults_have_agent_tags_and_no_comments() {
        let t = Templates::default();
        assert!(t.classifier_system.starts_with("[agent:classifier]"));
        assert!(t.validator_system.starts_with("[agent:validator]"));
        assert!(!t.repair.contains("## template"));
    }

    #[test]
    fn directory_overrides_single_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("repair.txt"), "## note\nfix: {{error}}\n").unwrap();
        let t = Templates::load_dir(dir.path()).unwrap();
        assert_eq!(t.repair, "fix: {{error}}");
        assert_eq!(t.classifier_system, Templates::default().classifier_system);
        assert_eq!(Templates::FILES.len(), 14);
    }
}
