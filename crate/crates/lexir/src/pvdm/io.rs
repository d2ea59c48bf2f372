//! PV-DM model persistence: magic, version, config block, vocabulary block,
//! row-major matrices, trailing checksum. Loading a saved model reproduces it
//! bit for bit.

use std::fs;
use std::path::Path;

use super::{Matrix, PvDmConfig, PvDmModel, Vocabulary, NULL_TOKEN};
use crate::bm25::{check_envelope, fnv1a64, kind_from_tag, kind_tag, write_str, write_u64, Reader};
use crate::corpus::DocId;
use crate::error::{Error, Result};

const MODEL_MAGIC: &[u8; 4] = b"LXPV";

impl PvDmModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MODEL_MAGIC);
        buf.push(crate::bm25::FORMAT_VERSION);

        let config = self.config();
        write_u64(&mut buf, config.dim as u64);
        write_u64(&mut buf, config.window as u64);
        write_u64(&mut buf, config.epochs as u64);
        buf.extend_from_slice(&config.learning_rate.to_le_bytes());
        write_u64(&mut buf, config.negatives as u64);
        write_u64(&mut buf, config.min_count);
        write_u64(&mut buf, config.seed);

        let vocab = self.vocab();
        write_u64(&mut buf, vocab.len() as u64);
        for i in 0..vocab.len() {
            write_str(&mut buf, vocab.term(i));
            write_u64(&mut buf, vocab.count(i));
        }

        write_u64(&mut buf, self.paragraphs().len() as u64);
        for id in self.paragraphs() {
            buf.push(kind_tag(id.kind));
            write_str(&mut buf, &id.label);
        }

        for matrix in [&self.word_vecs, &self.para_vecs, &self.out_weights] {
            for value in matrix.data() {
                buf.extend_from_slice(&value.to_le_bytes());
            }
        }

        let checksum = fnv1a64(&buf);
        write_u64(&mut buf, checksum);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let payload = check_envelope(bytes, MODEL_MAGIC)?;
        let mut r = Reader::new(payload);
        let config = PvDmConfig {
            dim: r.u64()? as usize,
            window: r.u64()? as usize,
            epochs: r.u64()? as usize,
            learning_rate: r.f64()?,
            negatives: r.u64()? as usize,
            min_count: r.u64()?,
            seed: r.u64()?,
        };

        let n_terms = r.u64()? as usize;
        let mut terms = Vec::with_capacity(n_terms);
        let mut counts = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            terms.push(r.string()?);
            counts.push(r.u64()?);
        }
        if terms.first().map(String::as_str) != Some(NULL_TOKEN) {
            return Err(Error::Format {
                message: "vocabulary does not start with the null token".into(),
            });
        }
        if terms.len() < 2 || counts[1..].iter().any(|&c| c == 0) {
            return Err(Error::Format {
                message: "vocabulary must hold at least one term with a positive count".into(),
            });
        }
        let vocab = Vocabulary::from_parts(terms, counts, config.min_count);

        let n_paragraphs = r.u64()? as usize;
        let mut paragraphs = Vec::with_capacity(n_paragraphs);
        for _ in 0..n_paragraphs {
            let kind = kind_from_tag(r.u8()?)?;
            let label = r.string()?;
            paragraphs.push(DocId::new(kind, label));
        }

        let mut read_matrix = |rows: usize, cols: usize| -> Result<Matrix> {
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                data.push(r.f64()?);
            }
            Ok(Matrix::from_data(rows, cols, data))
        };
        let word_vecs = read_matrix(vocab.len(), config.dim)?;
        let para_vecs = read_matrix(n_paragraphs, config.dim)?;
        let out_weights = read_matrix(vocab.len(), config.input_width())?;
        r.finish()?;

        Ok(PvDmModel::from_parts(
            vocab,
            paragraphs,
            word_vecs,
            para_vecs,
            out_weights,
            config,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::pvdm::train;
    use crate::text::{normalize, NormalizerConfig};

    fn trained_model() -> PvDmModel {
        let docs = vec![
            normalize("a b a c", DocId::case("C1"), &NormalizerConfig::passthrough()),
            normalize("b c b a", DocId::case("C2"), &NormalizerConfig::passthrough()),
            normalize("c a b", DocId::query("Q1"), &NormalizerConfig::passthrough()),
        ];
        let corpus = Corpus::from_documents(docs).unwrap();
        let config = PvDmConfig {
            dim: 4,
            window: 2,
            epochs: 3,
            learning_rate: 0.025,
            negatives: 2,
            min_count: 1,
            seed: 5,
        };
        train(&corpus, &config).unwrap().0
    }

    #[test]
    fn save_load_is_bit_identical() {
        let model = trained_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        model.save(&path).unwrap();
        let loaded = PvDmModel::load(&path).unwrap();
        assert_eq!(model.to_bytes(), loaded.to_bytes());
        assert_eq!(model.vocab(), loaded.vocab());
        assert_eq!(model.paragraphs(), loaded.paragraphs());
        assert_eq!(
            model.paragraph_vector_by_id(&DocId::query("Q1")),
            loaded.paragraph_vector_by_id(&DocId::query("Q1"))
        );
    }

    #[test]
    fn truncated_model_fails_checksum() {
        let bytes = trained_model().to_bytes();
        assert!(matches!(
            PvDmModel::from_bytes(&bytes[..bytes.len() - 20]),
            Err(Error::ChecksumMismatch)
        ));
    }

    #[test]
    fn wrong_version_and_magic_rejected() {
        let mut bytes = trained_model().to_bytes();
        bytes[4] = 7;
        assert!(matches!(
            PvDmModel::from_bytes(&bytes),
            Err(Error::VersionMismatch { found: 7 })
        ));
        let mut bytes = trained_model().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(
            PvDmModel::from_bytes(&bytes),
            Err(Error::Format { .. })
        ));
    }
}
