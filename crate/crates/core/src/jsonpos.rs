//! Line lookup for JSON paths such as `maps[1].matrix`, used to attach line
//! numbers to validation errors found after deserialization.

use std::collections::HashMap;

struct Scanner<'a> {
    s: &'a [u8],
    i: usize,
    line: usize,
    lines: HashMap<String, usize>,
}

impl Scanner<'_> {
    fn ws(&mut self) {
        while let Some(&c) = self.s.get(self.i) {
            match c {
                b'\n' => {
                    self.line += 1;
                    self.i += 1;
                }
                b' ' | b'\t' | b'\r' => self.i += 1,
                _ => break,
            }
        }
    }

    fn string(&mut self) -> Option<String> {
        if self.s.get(self.i) != Some(&b'"') {
            return None;
        }
        self.i += 1;
        let start = self.i;
        while let Some(&c) = self.s.get(self.i) {
            match c {
                b'\\' => self.i += 2,
                b'"' => {
                    let out = String::from_utf8_lossy(&self.s[start..self.i]).into_owned();
                    self.i += 1;
                    return Some(out);
                }
                b'\n' => {
                    self.line += 1;
                    self.i += 1;
                }
                _ => self.i += 1,
            }
        }
        None
    }

    fn value(&mut self, path: &str) -> Option<()> {
        self.ws();
        self.lines.insert(path.to_string(), self.line);
        match *self.s.get(self.i)? {
            b'{' => {
                self.i += 1;
                loop {
                    self.ws();
                    if self.s.get(self.i) == Some(&b'}') {
                        self.i += 1;
                        return Some(());
                    }
                    let key = self.string()?;
                    self.ws();
                    if self.s.get(self.i) != Some(&b':') {
                        return None;
                    }
                    self.i += 1;
                    let child = if path.is_empty() {
                        key
                    } else {
                        format!("{path}.{key}")
                    };
                    self.value(&child)?;
                    self.ws();
                    match *self.s.get(self.i)? {
                        b',' => self.i += 1,
                        b'}' => {
                            self.i += 1;
                            return Some(());
                        }
                        _ => return None,
                    }
                }
            }
            b'[' => {
                self.i += 1;
                let mut k = 0;
                loop {
                    self.ws();
                    if self.s.get(self.i) == Some(&b']') {
                        self.i += 1;
                        return Some(());
                    }
                    self.value(&format!("{path}[{k}]"))?;
                    k += 1;
                    self.ws();
                    match *self.s.get(self.i)? {
                        b',' => self.i += 1,
                        b']' => {
                            self.i += 1;
                            return Some(());
                        }
                        _ => return None,
                    }
                }
            }
            b'"' => self.string().map(|_| ()),
            _ => {
                while let Some(&c) = self.s.get(self.i) {
                    if matches!(c, b',' | b'}' | b']' | b' ' | b'\n' | b'\t' | b'\r') {
                        break;
                    }
                    self.i += 1;
                }
                Some(())
            }
        }
    }
}

/// 1-based line where the value at `path` starts. Falls back to the longest
/// known prefix of the path, then to line 1.
pub fn line_of(text: &str, path: &str) -> usize {
    let mut sc = Scanner {
        s: text.as_bytes(),
        i: 0,
        line: 1,
        lines: HashMap::new(),
    };
    let _ = sc.value("");
    let mut p = path.to_string();
    loop {
        if let Some(l) = sc.lines.get(&p) {
            return *l;
        }
        match p.rfind(['.', '[']) {
            Some(i) => p.truncate(i),
            None => return sc.lines.get("").copied().unwrap_or(1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_nested_paths() {
        let text = "{\n  \"a\": 1,\n  \"maps\": [\n    {\"m\": [1, 2]},\n    {\n      \"m\": \"x\"\n    }\n  ]\n}\n";
        assert_eq!(line_of(text, "a"), 2);
        assert_eq!(line_of(text, "maps"), 3);
        assert_eq!(line_of(text, "maps[0].m"), 4);
        assert_eq!(line_of(text, "maps[1]"), 5);
        assert_eq!(line_of(text, "maps[1].m"), 6);
        assert_eq!(line_of(text, "maps[1].zzz"), 5);
        assert_eq!(line_of(text, "nothing"), 1);
    }
}
