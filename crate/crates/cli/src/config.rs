//! `key = value` config files. Every key names a long flag (underscores and
//! dashes are interchangeable); the file's values are spliced into the
//! argument list ahead of the user's own flags so the latter take precedence.

use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::error::CliError;

const GLOBAL_VALUED: [&str; 4] = ["--threads", "--seed", "--config", "--out-dir"];

pub fn parse_config(text: &str, path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
            path: path.to_path_buf(),
            line: i + 1,
            message: "expected `key = value`".into(),
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config {
                path: path.to_path_buf(),
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Index of the subcommand token in `argv`, skipping global options.
fn subcommand_index(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if GLOBAL_VALUED.contains(&a.as_str()) {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            i += 1;
            continue;
        }
        return Some(i);
    }
    None
}

/// The config file named by `--config` (or `--config=`), if any.
pub fn config_path(argv: &[String]) -> Option<String> {
    argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(String::from)
        }
    })
}

/// Rewrites `argv` so config entries precede the user's flags at the right level.
pub fn merge_config(argv: &[String], entries: &[(String, String)]) -> Result<Vec<String>, CliError> {
    let cmd = Cli::command();
    let sub_idx = subcommand_index(argv);
    let sub = sub_idx.and_then(|i| cmd.find_subcommand(&argv[i]));

    let mut global = Vec::new();
    let mut local = Vec::new();
    for (key, value) in entries {
        let flag = format!("--{key}");
        if key == "config" {
            continue;
        }
        if GLOBAL_VALUED.contains(&flag.as_str()) {
            global.push(flag);
            global.push(value.clone());
            continue;
        }
        let Some(sub) = sub else {
            return Err(CliError::Usage(format!("config key `{key}` needs a subcommand")));
        };
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            return Err(CliError::Usage(format!(
                "config key `{key}` is not a flag of `{}`",
                sub.get_name()
            )));
        };
        if arg.get_action().takes_values() {
            local.push(flag);
            local.push(value.clone());
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => local.push(flag),
                "false" | "no" | "0" => {}
                other => {
                    return Err(CliError::Usage(format!("config key `{key}`: expected a boolean, got `{other}`")))
                }
            }
        }
    }

    let mut out = vec![argv[0].clone()];
    out.extend(global);
    match sub_idx {
        Some(i) => {
            out.extend_from_slice(&argv[1..=i]);
            out.extend(local);
            out.extend_from_slice(&argv[i + 1..]);
        }
        None => out.extend_from_slice(&argv[1..]),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn file_values_precede_user_flags() {
        let entries = parse_config("# c\nthreads = 2\ndelta=20\nmode = hy\n\n", Path::new("x")).unwrap();
        let merged = merge_config(&argv("moblag --seed 3 leadlag --delta 10 --mobility a --deaths b"), &entries).unwrap();
        assert_eq!(
            merged,
            argv("moblag --threads 2 --seed 3 leadlag --delta 20 --mode hy --delta 10 --mobility a --deaths b")
        );
    }

    #[test]
    fn booleans_and_unknown_keys() {
        let entries = parse_config("cut = true\n", Path::new("x")).unwrap();
        let merged = merge_config(&argv("moblag regress"), &entries).unwrap();
        assert_eq!(merged, argv("moblag regress --cut"));
        let entries = parse_config("bogus = 1\n", Path::new("x")).unwrap();
        assert!(merge_config(&argv("moblag regress"), &entries).is_err());
        assert!(parse_config("novalue\n", Path::new("x")).is_err());
    }
}
