// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::normalize_keyword;

/// Rooted topic tree used as similarity ground truth.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    /// Number of strict descendants of each topic.
    subsumed: Vec<usize>,
    root: usize,
}

impl Taxonomy {
    /// Builds from `(parent, child)` edges. Every topic must have at most one
    /// parent and exactly one topic may be parentless.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |s: &str| -> usize {
            let s = normalize_keyword(s);
            if let Some(&i) = index.get(&s) {
                return i;
            }
            names.push(s.clone());
            index.insert(s, names.len() - 1);
            names.len() - 1
        };
        let pairs: Vec<(usize, usize)> = edges
            .iter()
            .map(|(p, c)| (intern(p.as_ref()), intern(c.as_ref())))
            .collect();
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidTaxonomy("no topics".into()));
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in &pairs {
            if p == c {
                return Err(Error::InvalidTaxonomy(format!("topic {:?} subsumes itself", names[c])));
            }
            match parent[c] {
                Some(q) if q == p => continue,
                Some(_) => {
                    return Err(Error::InvalidTaxonomy(format!(
                        "topic {:?} has several parents",
                        names[c]
                    )));
                }
                None => {
                    parent[c] = Some(p);
                    children[p].push(c);
                }
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        let root = match roots.as_slice() {
            [r] => *r,
            [] => return Err(Error::InvalidTaxonomy("no root topic (cycle)".into())),
            many => {
                return Err(Error::InvalidTaxonomy(format!("{} parentless topics", many.len())));
            }
        };

        let mut depth = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        depth[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let t = order[head];
            head += 1;
            for &c in &children[t] {
                depth[c] = depth[t] + 1;
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidTaxonomy(
                "some topics are unreachable from the root".into(),
            ));
        }
        let mut subsumed = vec![0usize; n];
        for &t in order.iter().rev() {
            if let Some(p) = parent[t] {
                subsumed[p] += subsumed[t] + 1;
            }
        }
        Ok(Self {
            names,
            index,
            parent,
            depth,
            subsumed,
            root,
        })
    }

    /// Parses `<parent>\t<child>` lines.
    pub fn parse(text: &str, name: &Path) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (p, c) = line.split_once('\t').ok_or_else(|| Error::Parse {
                path: name.to_path_buf(),
                line: i + 1,
                msg: "expected `<parent>\\t<child>`".into(),
            })?;
            edges.push((p.to_owned(), c.to_owned()));
        }
        Self::from_edges(&edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        Self::parse(&fs::read_to_string(p)?, p)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn topics(&self) -> &[String] {
        &self.names
    }

    pub fn root(&self) -> &str {
        &self.names[self.root]
    }

    pub fn parent_of(&self, topic: &str) -> Result<Option<&str>> {
        Ok(self.parent[self.id(topic)?].map(|p| self.names[p].as_str()))
    }

    fn id(&self, topic: &str) -> Result<usize> {
        self.index
            .get(&normalize_keyword(topic))
            .copied()
            .ok_or_else(|| Error::UnknownTopic(topic.to_owned()))
    }

    /// `|sc(t)|`: strict descendants of `t`.
    pub fn subsumed_count(&self, topic: &str) -> Result<usize> {
        Ok(self.subsumed[self.id(topic)?])
    }

    fn ic_of(&self, t: usize) -> f64 {
        let size = self.names.len() as f64;
        if self.names.len() == 1 {
            return 1.0;
        }
        ((self.subsumed[t] as f64 + 1.0) / size).ln() / (1.0 / size).ln()
    }

    /// Intrinsic information content: 0 at the root, 1 at leaves.
    pub fn information_content(&self, topic: &str) -> Result<f64> {
        Ok(self.ic_of(self.id(topic)?))
    }

    fn lcs_of(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Deepest common ancestor (a topic subsumes itself).
    pub fn least_common_subsumer(&self, t1: &str, t2: &str) -> Result<&str> {
        Ok(&self.names[self.lcs_of(self.id(t1)?, self.id(t2)?)])
    }

    /// `1 - d_jcn / 2` with `d_jcn = IC(t1) + IC(t2) - 2 IC(lcs)`.
    pub fn similarity(&self, t1: &str, t2: &str) -> Result<f64> {
        let (a, b) = (self.id(t1)?, self.id(t2)?);
        if a == b {
            return Ok(1.0);
        }
        let d = self.ic_of(a) + self.ic_of(b) - 2.0 * self.ic_of(self.lcs_of(a, b));
        Ok((1.0 - d / 2.0).clamp(0.0, 1.0))
    }
}
