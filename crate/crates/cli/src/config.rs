//! `key=value` config files folded into the argument list.
//!
//! Keys are long flag names without the leading dashes. Config values are
//! dropped for any flag that is also given explicitly, so command-line
//! flags always win.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::cli::Cli;

pub fn parse(text: &str, path: &Path) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("{}:{}: empty key", path.display(), i + 1));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Returns `args` with config-file flags spliced in, or an error message.
pub fn apply(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let pairs = parse(&text, path)?;

    let cmd = Cli::command();
    let sub_pos = args
        .iter()
        .position(|a| cmd.find_subcommand(a.to_string_lossy().as_ref()).is_some());
    let Some(sub_pos) = sub_pos else {
        return Ok(args);
    };
    let sub_name = args[sub_pos].to_string_lossy().into_owned();
    let sub = cmd.find_subcommand(&sub_name).expect("found above");

    let mut global = Vec::new();
    let mut local = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            return Err(format!("{}: config files cannot nest", path.display()));
        }
        let is_global = cmd.get_arguments().any(|a| a.get_long() == Some(key.as_str()));
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| format!("{}: unknown key `{key}` for {sub_name}", path.display()))?;
        let explicit = args
            .iter()
            .map(|a| a.to_string_lossy())
            .any(|a| a == format!("--{key}") || a.starts_with(&format!("--{key}=")));
        if explicit {
            continue;
        }
        let target = if is_global { &mut global } else { &mut local };
        if arg.get_action().takes_values() {
            target.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" | "" => target.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => return Err(format!("{}: `{key}` expects true or false, got `{other}`", path.display())),
            }
        }
    }
    let mut out = Vec::with_capacity(args.len() + global.len() + local.len());
    out.push(args[0].clone());
    out.extend(global);
    out.extend(args[1..=sub_pos].iter().cloned());
    out.extend(local);
    out.extend(args[sub_pos + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let p = parse("# c\nseed = 3\n\nround=true # inline\n", Path::new("c")).unwrap();
        assert_eq!(p, vec![("seed".into(), "3".into()), ("round".into(), "true".into())]);
        assert_eq!(parse("oops\n", Path::new("c")).unwrap_err(), "c:1: expected key=value");
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("run.conf");
        std::fs::write(&f, "seed=3\nthreads=2\nradius=0.2\n").unwrap();
        let args: Vec<OsString> = ["lapcompress", "gen-graph", "--n", "5", "--seed", "9", "--config"]
            .iter()
            .map(OsString::from)
            .chain([f.clone().into_os_string()])
            .collect();
        let spliced = apply(args).unwrap();
        let cli = <Cli as clap::Parser>::try_parse_from(spliced).unwrap();
        assert_eq!(cli.threads, Some(2));
        match cli.command {
            crate::cli::Command::GenGraph(g) => {
                assert_eq!(g.seed, 9);
                assert_eq!(g.radius, 0.2);
            }
            _ => panic!("wrong subcommand"),
        }
        std::fs::write(&f, "bogus=1\n").unwrap();
        let args: Vec<OsString> = ["lapcompress", "gen-graph", "--n", "5", "--config"]
            .iter()
            .map(OsString::from)
            .chain([f.into_os_string()])
            .collect();
        assert!(apply(args).unwrap_err().contains("unknown key `bogus`"));
    }
}
