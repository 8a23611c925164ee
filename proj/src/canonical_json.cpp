#include "lyacert/canonical_json.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <memory>
#include <sstream>

#include "lyacert/errors.hpp"

namespace lyacert {

namespace {

void write_string(std::string& out, const std::string& s) {
  // nlohmann escapes per RFC 8259 and leaves UTF-8 untouched.
  out += Json(s).dump();
}

void write_double(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw InternalInconsistencyError("canonical_dump: to_chars failed");
  out.append(buf.data(), end);
}

void write(std::string& out, const Json& v) {
  switch (v.type()) {
    case Json::value_t::null:
      out += "null";
      break;
    case Json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case Json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case Json::value_t::number_float:
      write_double(out, v.get<double>());
      break;
    case Json::value_t::string:
      write_string(out, v.get_ref<const std::string&>());
      break;
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        write(out, e);
      }
      out += ']';
      break;
    }
    case Json::value_t::object: {
      // nlohmann::json objects are std::map backed, so iteration is sorted.
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        write_string(out, it.key());
        out += ':';
        write(out, it.value());
      }
      out += '}';
      break;
    }
    default:
      throw InvalidArgument("canonical_dump: unsupported JSON value");
  }
}

}  // namespace

std::string canonical_dump(const Json& value) {
  std::string out;
  write(out, value);
  return out;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw NumericalError("sha256_hex: digest computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

double number_from_json(const Json& value, const std::string& pointer) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s == "inf" || s == "Infinity") return kInf;
  }
  throw ParseError(pointer + ": expected a number");
}

Matrix matrix_from_json(const Json& value, const std::string& pointer) {
  if (!value.is_array() || value.empty()) {
    throw ParseError(pointer + ": expected a non-empty array of rows");
  }
  const std::size_t rows = value.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string where = pointer + "/" + std::to_string(i);
    if (!value[i].is_array()) throw ParseError(where + ": expected an array");
    if (i == 0) cols = value[i].size();
    if (value[i].size() != cols) {
      std::ostringstream os;
      os << where << ": row has " << value[i].size() << " entries, expected " << cols;
      throw ParseError(os.str());
    }
  }
  if (cols == 0) throw ParseError(pointer + "/0: rows must be non-empty");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const Json& e = value[i][j];
      const std::string where = pointer + "/" + std::to_string(i) + "/" + std::to_string(j);
      if (!e.is_number()) throw ParseError(where + ": expected a number");
      const double x = e.get<double>();
      if (!std::isfinite(x)) throw ParseError(where + ": entry is not finite");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
    }
  }
  return m;
}

Vector vector_from_json(const Json& value, const std::string& pointer) {
  if (!value.is_array() || value.empty()) throw ParseError(pointer + ": expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string where = pointer + "/" + std::to_string(i);
    if (!value[i].is_number()) throw ParseError(where + ": expected a number");
    v[static_cast<Eigen::Index>(i)] = value[i].get<double>();
    if (!std::isfinite(v[static_cast<Eigen::Index>(i)])) throw ParseError(where + ": entry is not finite");
  }
  return v;
}

}  // namespace lyacert
