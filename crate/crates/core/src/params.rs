//! `name:key=value,key=value` descriptors shared by class and generator flags.

use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub name: String,
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn parse(text: &str) -> Result<Params, String> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let name = name.trim();
        if name.is_empty() {
            return Err(format!("missing kind in `{text}`"));
        }
        let mut values = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{pair}`"))?;
            if values
                .insert(k.trim().to_string(), v.trim().to_string())
                .is_some()
            {
                return Err(format!("parameter `{}` given twice", k.trim()));
            }
        }
        Ok(Params {
            name: name.to_string(),
            values,
        })
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    pub fn required<T: FromStr>(&mut self, key: &str) -> Result<T, String> {
        let raw = self
            .take_raw(key)
            .ok_or_else(|| format!("`{}` needs parameter `{key}`", self.name))?;
        raw.parse()
            .map_err(|_| format!("bad value `{raw}` for `{key}`"))
    }

    pub fn optional<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, String> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| format!("bad value `{raw}` for `{key}`")),
        }
    }

    /// A `-`-separated list such as `2-1-3`.
    pub fn list(&mut self, key: &str) -> Result<Option<Vec<usize>>, String> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .split('-')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| format!("bad list `{raw}` for `{key}`"))
                })
                .collect::<Result<_, _>>()
                .map(Some),
        }
    }

    /// Fails on parameters nobody consumed.
    pub fn finish(self) -> Result<(), String> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => Err(format!("unknown parameter `{k}` for `{}`", self.name)),
        }
    }
}

pub fn join_list(items: &[usize]) -> String {
    items
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("-")
}

/// `⌈log2 x⌉`, with `log 0 = log 1 = 0`.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_leftovers() {
        let mut p = Params::parse("occur:D=3,k=1,s=32").unwrap();
        assert_eq!(p.name, "occur");
        assert_eq!(p.required::<u32>("D").unwrap(), 3);
        assert_eq!(p.required::<u32>("k").unwrap(), 1);
        assert!(p.clone().finish().is_err());
        assert_eq!(p.required::<u64>("s").unwrap(), 32);
        p.finish().unwrap();
        assert!(Params::parse("sparse:s").is_err());
        assert!(Params::parse(":s=1").is_err());
    }

    #[test]
    fn ceil_log_values() {
        let cases = [
            (0, 0),
            (1, 0),
            (2, 1),
            (3, 2),
            (4, 2),
            (5, 3),
            (32, 5),
            (33, 6),
        ];
        for (x, want) in cases {
            assert_eq!(ceil_log2(x), want, "x = {x}");
        }
    }
}
