//! Early stopping on a validation-loss history.

/// Verdict after the latest epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    /// Halt and restore the weights from `best_epoch`.
    Stop { best_epoch: usize },
}

/// Stop once `patience` consecutive epochs fail to strictly improve on the
/// running best loss; report the best epoch for weight restoration.
pub fn early_stopping_decision(history: &[f64], patience: usize) -> StopDecision {
    assert!(patience >= 1, "patience must be >= 1");
    if history.is_empty() {
        return StopDecision::Continue;
    }
    let mut best_epoch = 0;
    let mut best = history[0];
    for (i, &loss) in history.iter().enumerate().skip(1) {
        if loss < best {
            best = loss;
            best_epoch = i;
        }
    }
    if history.len() - 1 - best_epoch >= patience {
        StopDecision::Stop { best_epoch }
    } else {
        StopDecision::Continue
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn still_improving_continues() {
        assert_eq!(
            early_stopping_decision(&[1.0, 0.9, 0.8], 3),
            StopDecision::Continue
        );
    }

    #[test]
    fn plateau_stops_at_best() {
        assert_eq!(
            early_stopping_decision(&[1.0, 0.9, 0.95, 0.96, 0.97], 3),
            StopDecision::Stop { best_epoch: 1 }
        );
    }

    #[test]
    fn first_epoch_is_the_running_best() {
        assert_eq!(early_stopping_decision(&[1.0], 1), StopDecision::Continue);
    }

    #[test]
    fn ties_do_not_count_as_improvement() {
        assert_eq!(
            early_stopping_decision(&[1.0, 1.0], 1),
            StopDecision::Stop { best_epoch: 0 }
        );
    }
}
