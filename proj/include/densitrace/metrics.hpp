#pragma once

#include "densitrace/model.hpp"

namespace densitrace {

/// Half the L1 distance between two distributions over the same vocabulary.
/// Throws VocabMismatch when the sizes differ.
double tv_distance(const Distribution& p, const Distribution& q);

/// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const Distribution& p);

/// Largest q in [0, 100] such that for every q' <= q the top-q'% nucleus S of
/// `full` (smallest highest-probability prefix with mass >= q'/100, ties by
/// token id) is reproduced by `trace`: the mass of S differs by at most
/// `mass_tolerance` and so does every member's probability.
int nucleus_reconstruction(const Distribution& full, const Distribution& trace, double mass_tolerance = 0.01);

/// KL(p || q) in nats. Debug only; unbounded when q has zeros where p does not.
double kl_divergence(const Distribution& p, const Distribution& q);

}  // namespace densitrace
