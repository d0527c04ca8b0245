//! Minimal CoNLL-U reader.
//!
//! Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped, so
//! token positions line up with the surface tokens of the sentence.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::read_to_string;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepToken {
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// 1-based head index; 0 is the root.
    pub head: usize,
    pub deprel: String,
}

impl DepToken {
    /// Relation without its subtype (`acl:relcl` -> `acl`).
    pub fn base_relation(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepSentence {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub tokens: Vec<DepToken>,
}

impl DepSentence {
    /// 0-based indices of the direct dependents of 0-based token `i`.
    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.head == i + 1)
            .map(|(j, _)| j)
    }

    /// `i` and all its descendants, ascending.
    pub fn subtree(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        let mut stack = vec![i];
        while let Some(n) = stack.pop() {
            for c in self.children(n) {
                if !out.contains(&c) {
                    out.push(c);
                    stack.push(c);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().position(|t| t.head == 0)
    }
}

pub fn read_conllu(path: &Path) -> Result<Vec<DepSentence>> {
    parse_conllu(&read_to_string(path)?, path)
}

pub fn parse_conllu(text: &str, path: &Path) -> Result<Vec<DepSentence>> {
    let mut out = Vec::new();
    let mut cur = DepSentence::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !cur.tokens.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                match k.trim() {
                    "sent_id" => cur.sent_id = Some(v.trim().to_string()),
                    "text" => cur.text = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 10 columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad token id `{}`", cols[0])))?;
        if id != cur.tokens.len() + 1 {
            return Err(Error::parse(path, line_no, format!("token id {id} out of sequence")));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad head `{}`", cols[6])))?;
        cur.tokens.push(DepToken {
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            xpos: cols[4].to_string(),
            feats: cols[5].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    if !cur.tokens.is_empty() {
        out.push(cur);
    }
    for (k, s) in out.iter().enumerate() {
        let n = s.tokens.len();
        if s.tokens.iter().any(|t| t.head > n) {
            return Err(Error::InvalidArgument(format!(
                "{}: sentence {} has a head index beyond its {n} tokens",
                path.display(),
                k + 1
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# sent_id = s1\n# text = I think it went .\n\
1\tI\tI\tPRON\tPRP\t_\t2\tnsubj\t_\t_\n\
2\tthink\tthink\tVERB\tVBP\t_\t0\troot\t_\t_\n\
3\tit\tit\tPRON\tPRP\t_\t4\tnsubj\t_\t_\n\
4\twent\tgo\tVERB\tVBD\t_\t2\tccomp\t_\t_\n\
5\t.\t.\tPUNCT\t.\t_\t2\tpunct\t_\t_\n\
\n\
1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdo\tdo\tAUX\tVBP\t_\t3\taux\t_\t_\n\
2\tn't\tnot\tPART\tRB\t_\t3\tneg\t_\t_\n\
3\tgo\tgo\tVERB\tVB\t_\t0\troot\t_\t_\n";

    #[test]
    fn parses_sentences() {
        let s = parse_conllu(SAMPLE, Path::new("x.conllu")).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].sent_id.as_deref(), Some("s1"));
        assert_eq!(s[0].root(), Some(1));
        assert_eq!(s[0].subtree(3), vec![2, 3]);
        assert_eq!(s[1].tokens.len(), 3);
        assert_eq!(s[1].tokens[1].base_relation(), "neg");
    }

    #[test]
    fn rejects_short_rows() {
        let err = parse_conllu("1\tI\tI\n", Path::new("x.conllu")).unwrap_err();
        assert!(err.to_string().contains("x.conllu:1"));
    }
}
