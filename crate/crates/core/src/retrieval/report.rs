use serde::{Deserialize, Serialize};

use super::round1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    /// `None` where the method was not run on that column's dataset.
    pub values: Vec<Option<f64>>,
}

impl MethodRow {
    /// Mean of the present values.
    pub fn average(&self) -> Option<f64> {
        let present: Vec<f64> = self.values.iter().flatten().copied().collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    }
}

/// mAP table in the `Method | Avg | dataset...` layout. Values are percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTable {
    pub columns: Vec<String>,
    pub with_average: bool,
    pub rows: Vec<MethodRow>,
}

impl EvaluationTable {
    pub fn new(columns: Vec<String>, with_average: bool) -> Self {
        Self {
            columns,
            with_average,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, method: impl Into<String>, values: Vec<Option<f64>>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the header");
        self.rows.push(MethodRow {
            method: method.into(),
            values,
        });
    }

    pub fn render_text(&self) -> String {
        let mut header = vec!["Method".to_string()];
        if self.with_average {
            header.push("Avg".into());
        }
        header.extend(self.columns.iter().cloned());
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.1}", round1(v)));
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![r.method.clone()];
                if self.with_average {
                    cells.push(fmt(r.average()));
                }
                cells.extend(r.values.iter().map(|&v| fmt(v)));
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                std::iter::once(&header)
                    .chain(&body)
                    .map(|row| row[c].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c == 0 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            parts.join(" | ").trim_end().to_string()
        };
        let mut out = line(&header);
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("-+-"));
        out.push('\n');
        for row in &body {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = EvaluationTable::new(vec!["Tokyo".into(), "ROxf".into()], true);
        t.push("clahe", vec![Some(84.14), Some(60.0)]);
        t.push("none", vec![Some(79.4), None]);
        let text = t.render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Method |  Avg | Tokyo | ROxf");
        assert_eq!(lines[2], "clahe  | 72.1 |  84.1 | 60.0");
        assert_eq!(lines[3], "none   | 79.4 |  79.4 |    -");
    }
}
