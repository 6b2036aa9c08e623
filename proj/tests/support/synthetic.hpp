#pragma once

// Generated corpora for training tests: restaurant-booking dialogs in the
// bAbI line format, and a KB copy task.

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>

#include "mem2seq/corpus.hpp"

namespace m2s::synthetic {

/// Text of `dialogs` booking dialogs in the bAbI task-1 line format: a
/// greeting, a request naming a random subset of the four slots, one
/// question per missing slot, then the api_call line.
std::string babi_t1_text(std::size_t dialogs, std::uint64_t seed);

/// babi_t1_text parsed with the bAbI loader.
DatasetSplit babi_t1(std::size_t dialogs, std::uint64_t seed, const std::string& split_name = "train");

struct CopyTask {
  DatasetSplit train;
  /// Places drawn from the training pool, with the same addresses.
  DatasetSplit seen_test;
  /// Places and addresses that never occur in `train`.
  DatasetSplit unseen_test;
  /// Every place name and KB value, for entity F1.
  std::set<std::string> entities;
};

/// Dialogs "hi -> hello what can i help you with" then "where is X ->
/// X is at Y(X)". Each KB holds (X, address, Y(X)), (X, phone, ..) and
/// (X, distance, ..); the address occurs nowhere else in the dialog.
CopyTask copy_task(std::size_t train_dialogs, std::size_t test_dialogs, std::uint64_t seed);

}  // namespace m2s::synthetic
