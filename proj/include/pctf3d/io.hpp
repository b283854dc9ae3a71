#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "pctf3d/coupling.hpp"
#include "pctf3d/marginals.hpp"
#include "pctf3d/model.hpp"
#include "pctf3d/types.hpp"

namespace pctf3d {

/// Raised for unreadable, unwritable or unparsable files.
class io_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Comma-separated reals, one observation per row; `has_header` skips the
/// first line. Throws io_error on missing files, ragged rows or bad numbers.
Matrix read_csv(const std::string& path, bool has_header = false);
void write_csv(const std::string& path, const Matrix& data);

Coupling read_coupling_file(const std::string& path);
void write_coupling_file(const std::string& path, const Coupling& c);

FactorModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const FactorModel& model);

/// Binned-dataset cache: `<prefix>.csv` holds the integer bin matrix and
/// `<prefix>.edges` one line per dimension of space-separated bin edges
/// (a single "identity" token when no edges apply).
void write_binned_cache(const std::string& prefix, const BinnedDataset& data);
BinnedDataset read_binned_cache(const std::string& prefix);

/// key=value configuration lines; '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> parse_keyvalue(const std::string& text);
std::map<std::string, std::string> read_keyvalue_file(const std::string& path);

} // namespace pctf3d
