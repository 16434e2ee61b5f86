use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("magnitude weight is singular at the DC bin (0, 0)")]
    Singularity,

    #[error("cannot rescale a constant field (value {0})")]
    DegenerateField(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: ::image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the environment (files, codecs) rather than of
    /// the request itself.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Codec { .. })
    }
}
