/// Maps texts to fixed-length vectors. Equal texts within one batch get equal vectors.
pub trait Embedder {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed_batch(&self, texts: &[&str]) -> Vec<Vec<f64>>;
}

/// Character trigrams hashed into `dimension` buckets, weighted by smoothed
/// TF-IDF over the batch and L2-normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrigramTfIdf {
    pub dimension: usize,
    pub hash_seed: u64,
}

impl Default for TrigramTfIdf {
    fn default() -> Self {
        Self {
            dimension: 512,
            hash_seed: 0x5eed,
        }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

impl TrigramTfIdf {
    fn bucket(&self, gram: &[char]) -> usize {
        let mut h = FNV_OFFSET ^ self.hash_seed;
        for c in gram {
            for b in (*c as u32).to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(FNV_PRIME);
            }
        }
        (h % self.dimension as u64) as usize
    }

    fn term_counts(&self, text: &str) -> Vec<f64> {
        let mut counts = vec![0.0; self.dimension];
        if text.is_empty() {
            return counts;
        }
        let chars: Vec<char> = std::iter::once(' ')
            .chain(text.chars())
            .chain(std::iter::once(' '))
            .collect();
        for gram in chars.windows(3) {
            counts[self.bucket(gram)] += 1.0;
        }
        counts
    }
}

impl Embedder for TrigramTfIdf {
    fn name(&self) -> &str {
        "trigram-tfidf"
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[&str]) -> Vec<Vec<f64>> {
        let counts: Vec<Vec<f64>> = texts.iter().map(|t| self.term_counts(t)).collect();
        let mut df = vec![0.0; self.dimension];
        for row in &counts {
            for (d, &c) in df.iter_mut().zip(row) {
                if c > 0.0 {
                    *d += 1.0;
                }
            }
        }
        let n = texts.len() as f64;
        let idf: Vec<f64> = df.iter().map(|d| ((1.0 + n) / (1.0 + d)).ln() + 1.0).collect();
        counts
            .into_iter()
            .map(|mut row| {
                row.iter_mut().zip(&idf).for_each(|(v, w)| *v *= w);
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|v| *v /= norm);
                }
                row
            })
            .collect()
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
