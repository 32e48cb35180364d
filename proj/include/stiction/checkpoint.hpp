#pragma once

// Model containers, all little-endian.
//
// SGN1 (network):
//   "SGN1" u32 version=1 u32 kind u64 input_rows u64 channels
//   u32 n_conv {u64 filters} u64 kernel_width u32 n_dense {u64 units}
//   u32 n_lstm {u64 units} u64 lstm_dense u8 pooling u64 seed
//   u64 n_layers { u32 layer_kind u64 count {f64 param} }
//   u32 best_epoch u8 stopped_early
//   string history  ("epoch,train_loss,val_loss" table, u64 length prefix)
//
// SGS1 (cnn_svm):
//   "SGS1" u32 version=1, an embedded SGN1 block, then the SVM block:
//   u64 n_sv u64 dim f64 gamma f64 C f64 b {f64 sv} {f64 alpha*y}

#include <iosfwd>
#include <string>

#include "stiction/models.hpp"

namespace stiction {

void save_model(std::ostream& out, const Model& model);
Model load_model(std::istream& in);  // dispatches on the magic

std::string history_table(const nn::TrainHistory& history);
nn::TrainHistory parse_history_table(const std::string& text);

}  // namespace stiction
