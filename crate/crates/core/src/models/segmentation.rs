use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One homogeneous run of frames assigned to a single state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub state: usize,
    /// First frame index of the segment.
    pub start: usize,
    /// Length in frames, >= 1.
    pub duration: usize,
}

impl Segment {
    /// One past the last frame index.
    pub fn end(&self) -> usize {
        self.start + self.duration
    }
}

/// An ordered list of segments tiling `[0, T)` with no gaps or overlaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
}

impl Segmentation {
    /// Run-length encode a per-frame label sequence.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut segments = Vec::new();
        let mut iter = labels.iter().enumerate();
        if let Some((_, &first)) = iter.next() {
            let mut state = first;
            let mut start = 0usize;
            for (t, &s) in iter {
                if s != state {
                    segments.push(Segment {
                        state,
                        start,
                        duration: t - start,
                    });
                    state = s;
                    start = t;
                }
            }
            segments.push(Segment {
                state,
                start,
                duration: labels.len() - start,
            });
        }
        Segmentation { segments }
    }

    /// Expand back to one label per frame.
    pub fn to_labels(&self) -> Vec<usize> {
        let mut labels = Vec::with_capacity(self.total_frames());
        for seg in &self.segments {
            labels.extend(std::iter::repeat(seg.state).take(seg.duration));
        }
        labels
    }

    pub fn total_frames(&self) -> usize {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Check the segments tile `[0, t_len)` exactly.
    pub fn validate_tiling(&self, t_len: usize) -> Result<()> {
        let mut cursor = 0usize;
        for seg in &self.segments {
            if seg.duration == 0 {
                return Err(Error::Contract("zero-length segment".into()));
            }
            if seg.start != cursor {
                return Err(Error::Contract(format!(
                    "segment starts at {} but previous ended at {cursor}",
                    seg.start
                )));
            }
            cursor = seg.end();
        }
        if cursor != t_len {
            return Err(Error::Contract(format!(
                "segments cover [0, {cursor}) but the series has {t_len} frames"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rle_round_trip() {
        let labels = vec![0, 0, 1, 1, 1, 0, 2, 2];
        let seg = Segmentation::from_labels(&labels);
        assert_eq!(seg.segments.len(), 4);
        assert_eq!(seg.to_labels(), labels);
        seg.validate_tiling(8).unwrap();
    }

    #[test]
    fn rle_merges_adjacent_same_state() {
        let seg = Segmentation::from_labels(&[3, 3, 3]);
        assert_eq!(
            seg.segments,
            vec![Segment {
                state: 3,
                start: 0,
                duration: 3
            }]
        );
    }

    #[test]
    fn tiling_validation_catches_gaps() {
        let seg = Segmentation {
            segments: vec![
                Segment {
                    state: 0,
                    start: 0,
                    duration: 2,
                },
                Segment {
                    state: 1,
                    start: 3,
                    duration: 1,
                },
            ],
        };
        assert!(seg.validate_tiling(4).is_err());
    }
}
