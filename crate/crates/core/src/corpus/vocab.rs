use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Bijection between external string ids and contiguous indices, assigned in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    forward: HashMap<String, usize>,
    reverse: Vec<String>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index for `id`, allocating the next one if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&idx) = self.forward.get(id) {
            return idx;
        }
        let idx = self.reverse.len();
        self.forward.insert(id.to_owned(), idx);
        self.reverse.push(id.to_owned());
        idx
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.forward.get(id).copied()
    }

    pub fn id_of(&self, index: usize) -> Option<&str> {
        self.reverse.get(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.reverse
    }

    /// Writes one `index<TAB>external-id` line per entry.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (idx, id) in self.reverse.iter().enumerate() {
            writeln!(w, "{idx}\t{id}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut map = IdMap::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: message.to_owned(),
            };
            let (idx, id) = line.split_once('\t').ok_or_else(|| parse_err("expected index<TAB>id"))?;
            let idx: usize = idx.parse().map_err(|_| parse_err("index is not an integer"))?;
            if idx != map.len() || map.forward.contains_key(id) {
                return Err(parse_err("indices must be contiguous and ids unique"));
            }
            map.intern(id);
        }
        Ok(map)
    }
}

/// User and item id maps for one corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    pub users: IdMap,
    pub items: IdMap,
}

impl Vocab {
    /// Ids that are just the decimal indices, for corpora that start out indexed.
    pub fn identity(num_users: usize, num_items: usize) -> Self {
        let map = |n: usize| {
            let mut m = IdMap::new();
            (0..n).for_each(|i| {
                m.intern(&i.to_string());
            });
            m
        };
        Vocab {
            users: map(num_users),
            items: map(num_items),
        }
    }
}
