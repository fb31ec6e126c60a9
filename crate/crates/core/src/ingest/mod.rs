//! Graph construction: synthetic biclique unions, symbol-adjacency graphs from
//! word lists and pronunciations, and generic edge lists.

mod pronounce;

pub use pronounce::{parse_pronouncing_dict, PronunciationMap, PHONEMES};

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, Matrix};

/// Lowercase words over `a-z`, in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordList {
    words: Vec<String>,
}

impl WordList {
    /// Lowercases each token and drops tokens with characters outside `a-z`.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = tokens
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty() && t.bytes().all(|b| b.is_ascii_lowercase()))
            .collect();
        WordList { words }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn load_word_list(path: impl AsRef<Path>) -> Result<WordList> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(WordList::from_tokens(text.lines()))
}

/// Symmetrized adjacency counts plus what was dropped on the way.
#[derive(Clone, Debug)]
pub struct BigramGraph {
    /// Labelled by symbol; symbols that never occur next to anything are removed.
    pub graph: AdjacencyMatrix,
    pub dropped: Vec<String>,
    /// Number of adjacent ordered pairs counted.
    pub pairs: usize,
}

/// Counts each adjacent ordered pair `(s_t, s_{t+1})` once and returns `C + Cᵀ`.
pub fn bigram_graph<Seq, S>(sequences: &[Seq], alphabet: &[&str]) -> Result<BigramGraph>
where
    Seq: AsRef<[S]>,
    S: AsRef<str>,
{
    let index: HashMap<&str, usize> = alphabet.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let k = alphabet.len();
    let mut counts = Matrix::zeros(k, k);
    let mut pairs = 0;
    for seq in sequences {
        let mut prev: Option<usize> = None;
        for sym in seq.as_ref() {
            let sym = sym.as_ref();
            let cur = *index.get(sym).ok_or_else(|| Error::UnknownSymbol {
                symbol: sym.to_string(),
            })?;
            if let Some(p) = prev {
                counts[(p, cur)] += 1.0;
                pairs += 1;
            }
            prev = Some(cur);
        }
    }
    let sym = counts.add(&counts.transpose());
    let labels = alphabet.iter().map(|s| s.to_string()).collect();
    let full = AdjacencyMatrix::new(sym)?.with_labels(labels)?;
    let (graph, kept) = full.drop_isolated();
    let dropped = (0..k)
        .filter(|i| !kept.contains(i))
        .map(|i| alphabet[i].to_string())
        .collect();
    Ok(BigramGraph { graph, dropped, pairs })
}

pub const LETTERS: [&str; 26] = [
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "o", "p", "q", "r", "s", "t", "u", "v", "w",
    "x", "y", "z",
];

/// Letter adjacency graph over `a-z`.
pub fn letter_bigram_graph(words: &WordList) -> Result<BigramGraph> {
    let sequences: Vec<Vec<&str>> = words
        .words()
        .iter()
        .map(|w| w.as_bytes().iter().map(|&b| LETTERS[(b - b'a') as usize]).collect())
        .collect();
    bigram_graph(&sequences, &LETTERS)
}

#[derive(Clone, Debug)]
pub struct PhonemeGraph {
    pub bigram: BigramGraph,
    /// Words with no dictionary entry.
    pub missing_words: usize,
}

/// Phoneme adjacency graph over the 39-symbol inventory, using each listed word's
/// primary pronunciation.
pub fn phoneme_bigram_graph(words: &WordList, dict: &PronunciationMap) -> Result<PhonemeGraph> {
    let mut sequences = Vec::with_capacity(words.len());
    let mut missing_words = 0;
    for w in words.words() {
        match dict.get(w) {
            Some(seq) => sequences.push(seq),
            None => missing_words += 1,
        }
    }
    let bigram = bigram_graph(&sequences, &PHONEMES)?;
    Ok(PhonemeGraph { bigram, missing_words })
}

/// Union of `k` complete bipartite graphs with sides of `a` and `b` nodes.
///
/// Node order: left side of biclique 0, right side of biclique 0, left side of
/// biclique 1, and so on.
pub fn gen_bicliques(k: usize, a: usize, b: usize, weight: f64) -> Result<AdjacencyMatrix> {
    if k == 0 || a == 0 || b == 0 {
        return Err(Error::InvalidArgument(format!(
            "biclique counts and sides must be positive, got k={k} a={a} b={b}"
        )));
    }
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "edge weight must be positive, got {weight}"
        )));
    }
    let size = a + b;
    let n = k * size;
    let m = Matrix::from_fn(n, n, |i, j| {
        let same_block = i / size == j / size;
        let opposite = (i % size < a) != (j % size < a);
        if same_block && opposite {
            weight
        } else {
            0.0
        }
    });
    AdjacencyMatrix::new(m)
}

/// Side labels for [`gen_bicliques`]: `0` for left sides, `1` for right sides.
pub fn biclique_sides(k: usize, a: usize, b: usize) -> Vec<usize> {
    (0..k * (a + b)).map(|i| usize::from(i % (a + b) >= a)).collect()
}

/// Biclique index of every node of [`gen_bicliques`].
pub fn biclique_blocks(k: usize, a: usize, b: usize) -> Vec<usize> {
    (0..k * (a + b)).map(|i| i / (a + b)).collect()
}

/// Reads `i<TAB>j<TAB>weight` lines (0-based, one undirected edge per line).
/// An optional `#n <count>` line fixes the node count; other `#` lines are comments.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<AdjacencyMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<AdjacencyMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut declared_n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(count) = rest.trim_start().strip_prefix("n ") {
                let n = count
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno, format!("bad node count {:?}", count.trim())))?;
                declared_n = Some(n);
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [i, j, w] = fields[..] else {
            return Err(err(
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        let i: usize = i.parse().map_err(|_| err(lineno, format!("bad node index {i:?}")))?;
        let j: usize = j.parse().map_err(|_| err(lineno, format!("bad node index {j:?}")))?;
        let w: f64 = w.parse().map_err(|_| err(lineno, format!("bad weight {w:?}")))?;
        if !w.is_finite() || w <= 0.0 {
            return Err(err(lineno, format!("edge weight must be positive, got {w}")));
        }
        edges.push((lineno, i, j, w));
    }
    let max_index = edges.iter().map(|e| e.1.max(e.2)).max();
    let n = match (declared_n, max_index) {
        (Some(n), _) => n,
        (None, Some(mx)) => mx + 1,
        (None, None) => 0,
    };
    let mut m = Matrix::zeros(n, n);
    for (lineno, i, j, w) in edges {
        if i >= n || j >= n {
            return Err(err(lineno, format!("node index out of range for {n} nodes")));
        }
        m[(i, j)] += w;
        m[(j, i)] += w;
    }
    AdjacencyMatrix::new(m)
}

/// Writes a graph as an edge list readable by [`load_edge_list`].
pub fn format_edge_list(a: &AdjacencyMatrix) -> String {
    let w = a.weights();
    let mut out = format!("#n {}\n", a.n());
    for i in 0..a.n() {
        for j in i..a.n() {
            let x = w[(i, j)];
            if x > 0.0 {
                // a self-loop line adds twice its weight to the diagonal
                let x = if i == j { x / 2.0 } else { x };
                out.push_str(&format!("{i}\t{j}\t{x:e}\n"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(a: &AdjacencyMatrix) -> Vec<Vec<f64>> {
        (0..a.n()).map(|i| a.weights().row(i).to_vec()).collect()
    }

    #[test]
    fn three_ten_by_ten_bicliques() {
        let a = gen_bicliques(3, 10, 10, 1.0).unwrap();
        assert_eq!(a.n(), 60);
        let edges = a.weights().as_slice().iter().filter(|&&x| x > 0.0).count() / 2;
        assert_eq!(edges, 300);
        assert!(a.weights().row_sums().iter().all(|&d| d == 10.0));
        assert!((0..60).all(|i| a.weights()[(i, i)] == 0.0));
    }

    #[test]
    fn bicliques_small_cases() {
        assert_eq!(
            mat(&gen_bicliques(1, 1, 1, 1.0).unwrap()),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        let a = gen_bicliques(2, 1, 2, 1.0).unwrap();
        assert_eq!(a.weights().row_sums(), vec![2.0, 1.0, 1.0, 2.0, 1.0, 1.0]);
        assert!(gen_bicliques(0, 1, 1, 1.0).is_err());
        assert_eq!(biclique_sides(2, 1, 2), vec![0, 1, 1, 0, 1, 1]);
        assert_eq!(biclique_blocks(2, 1, 2), vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn word_cleaning() {
        assert_eq!(WordList::from_tokens(["The", "cat"]).words(), &["the", "cat"]);
        assert_eq!(WordList::from_tokens(["it's", "ok", "", "x2", "café"]).words(), &["ok"]);
        assert_eq!(WordList::from_tokens(["a", "a"]).len(), 2);
    }

    #[test]
    fn bigram_examples() {
        let g = bigram_graph(&[vec!["a", "b"]], &["a", "b"]).unwrap();
        assert_eq!(mat(&g.graph), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let g = bigram_graph(&[vec!["a", "b", "a"]], &["a", "b"]).unwrap();
        assert_eq!(mat(&g.graph), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        let g = bigram_graph(&[vec!["n", "o", "o", "n"]], &["n", "o"]).unwrap();
        assert_eq!(mat(&g.graph), vec![vec![0.0, 2.0], vec![2.0, 2.0]]);
        assert_eq!(g.pairs, 3);
        assert_eq!(g.graph.total_mass(), 6.0);
    }

    #[test]
    fn bigram_drops_unused_symbols() {
        let g = bigram_graph(&[vec!["a", "c"]], &["a", "b", "c"]).unwrap();
        assert_eq!(g.dropped, vec!["b".to_string()]);
        assert_eq!(g.graph.labels().unwrap(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn bigram_rejects_unknown_symbol() {
        match bigram_graph(&[vec!["a", "z"]], &["a"]) {
            Err(Error::UnknownSymbol { symbol }) => assert_eq!(symbol, "z"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn letter_graph_counts_doubled_letters_on_diagonal() {
        let g = letter_bigram_graph(&WordList::from_tokens(["noon"])).unwrap();
        assert_eq!(g.graph.labels().unwrap(), &["n".to_string(), "o".to_string()]);
        assert_eq!(mat(&g.graph), vec![vec![0.0, 2.0], vec![2.0, 2.0]]);
        assert_eq!(g.dropped.len(), 24);
    }

    #[test]
    fn phoneme_graph_from_single_word() {
        let dict = PronunciationMap::parse_str("ABOUT  AH0 B AW1 T\nA  AH0\n", Path::new("d")).unwrap();
        let words = WordList::from_tokens(["about", "a", "zebra"]);
        let pg = phoneme_bigram_graph(&words, &dict).unwrap();
        assert_eq!(pg.missing_words, 1);
        let g = &pg.bigram.graph;
        let labels = g.labels().unwrap();
        assert_eq!(labels, &["AH", "AW", "B", "T"].map(String::from));
        let at = |x: &str, y: &str| {
            let i = labels.iter().position(|l| l == x).unwrap();
            let j = labels.iter().position(|l| l == y).unwrap();
            g.weights()[(i, j)]
        };
        assert_eq!(at("AH", "B"), 1.0);
        assert_eq!(at("B", "AW"), 1.0);
        assert_eq!(at("AW", "T"), 1.0);
        assert_eq!(g.total_mass(), 6.0);
    }

    #[test]
    fn empty_word_list_gives_empty_graph() {
        let dict = PronunciationMap::default();
        let pg = phoneme_bigram_graph(&WordList::default(), &dict).unwrap();
        assert_eq!(pg.bigram.graph.n(), 0);
        assert!(matches!(
            crate::graph::total_normalize(pg.bigram.graph.weights()),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn edge_list_examples() {
        let p = Path::new("e.tsv");
        assert_eq!(
            mat(&parse_edge_list("0\t1\t2.5\n", p).unwrap()),
            vec![vec![0.0, 2.5], vec![2.5, 0.0]]
        );
        assert_eq!(mat(&parse_edge_list("0\t0\t1\n", p).unwrap()), vec![vec![2.0]]);
        assert_eq!(
            mat(&parse_edge_list("0\t1\t1\n0\t1\t1\n", p).unwrap()),
            vec![vec![0.0, 2.0], vec![2.0, 0.0]]
        );
        assert_eq!(parse_edge_list("#n 3\n0\t1\t1\n", p).unwrap().n(), 3);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let p = Path::new("e.tsv");
        for (text, bad_line) in [("0\t1\t1\n1\t2\t-3\n", 2), ("0 1 1\n", 1), ("#n 1\n0\t1\t1\n", 2)] {
            match parse_edge_list(text, p) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, bad_line, "{text:?}"),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let a = AdjacencyMatrix::new(Matrix::from_rows(&[
            [2.0, 1.5, 0.0],
            [1.5, 0.0, 0.25],
            [0.0, 0.25, 6.0],
        ]))
        .unwrap();
        let back = parse_edge_list(&format_edge_list(&a), Path::new("x")).unwrap();
        assert_eq!(back.weights(), a.weights());
    }
}
