//! `path,class_id,split` CSV manifests.

use std::path::{Path, PathBuf};

use super::{SampleRef, Split};
use crate::error::{Error, Result};

pub fn write_manifest(samples: &[SampleRef], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["path", "class_id", "split"])?;
    for s in samples {
        let p = s.path.to_str().ok_or_else(|| Error::Format(format!("non UTF-8 path {}", s.path.display())))?;
        w.write_record([p, &s.class_id.to_string(), s.split.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<SampleRef>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("path") || headers.get(1) != Some("class_id") {
        return Err(Error::Format(format!("{}: expected header path,class_id[,split]", path.display())));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let class_id = rec
            .get(1)
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::Format(format!("{}:{line}: bad class_id", path.display())))?;
        let split = match rec.get(2) {
            Some(s) => Split::parse(s)?,
            None => Split::Unassigned,
        };
        out.push(SampleRef { path: PathBuf::from(rec.get(0).unwrap_or_default()), class_id, split });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let samples = vec![
            SampleRef { path: "glass/a b.png".into(), class_id: 1, split: Split::Train },
            SampleRef { path: "paper/c,d.jpg".into(), class_id: 0, split: Split::Test },
        ];
        write_manifest(&samples, &p).unwrap();
        assert_eq!(read_manifest(&p).unwrap(), samples);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("path,class_id,split\n"));
    }

    #[test]
    fn bad_class_id_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "path,class_id,split\na.png,x,train\n").unwrap();
        assert!(matches!(read_manifest(&p), Err(Error::Format(_))));
    }
}
