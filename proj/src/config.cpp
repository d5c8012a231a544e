#include "recap/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "recap/digest.hpp"
#include "recap/errors.hpp"

namespace recap {
namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::int64_t parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an unsigned integer: '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + value + "'");
}

}  // namespace

void RunConfig::validate() const {
  reservoir_spec().validate();
  quantizer_spec().validate();
  hebb_spec().validate();
  ridge_spec().validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (subset_per_class < 0) throw ConfigError("subset must be >= 0");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (kind != "recap" && kind != "ridge")
    throw ConfigError("kind must be 'recap' or 'ridge', got '" + kind + "'");
}

std::uint64_t RunConfig::digest() const {
  // Canonical key=value serialization; keys in fixed order, doubles at full
  // precision. Paths deliberately excluded.
  std::ostringstream text;
  text << "classes=" << classes << "\n"
       << "decay=" << format_double(decay) << "\n"
       << "epochs=" << epochs << "\n"
       << "kind=" << kind << "\n"
       << "leak_rate=" << format_double(leak_rate) << "\n"
       << "levels=" << levels << "\n"
       << "n_units=" << n_units << "\n"
       << "potentiation=" << format_double(potentiation) << "\n"
       << "ridge_beta=" << format_double(ridge_beta) << "\n"
       << "seed=" << seed << "\n"
       << "sparsity=" << format_double(sparsity) << "\n"
       << "sparsity_fraction=" << format_double(sparsity_fraction) << "\n"
       << "spectral_radius=" << format_double(spectral_radius) << "\n"
       << "steps=" << steps << "\n"
       << "subset=" << subset_per_class << "\n"
       << "subset_seed=" << subset_seed << "\n"
       << "washout=" << washout << "\n";
  Digest64 digest;
  digest.update(text.str());
  return digest.value();
}

ReservoirSpec RunConfig::reservoir_spec() const {
  ReservoirSpec spec;
  spec.n_units = n_units;
  spec.spectral_radius = spectral_radius;
  spec.leak_rate = leak_rate;
  spec.sparsity = sparsity;
  spec.input_dim = kImagePixels;
  spec.steps = steps;
  spec.washout = washout;
  spec.seed = seed;
  return spec;
}

QuantizerSpec RunConfig::quantizer_spec() const {
  QuantizerSpec spec;
  spec.levels = levels;
  return spec;
}

HebbSpec RunConfig::hebb_spec() const {
  HebbSpec spec;
  spec.potentiation = potentiation;
  spec.decay = decay;
  spec.classes = classes;
  spec.sparsity_fraction = sparsity_fraction;
  return spec;
}

RidgeSpec RunConfig::ridge_spec() const {
  RidgeSpec spec;
  spec.regularization = ridge_beta;
  return spec;
}

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "n_units") config.n_units = static_cast<int>(parse_int(key, value));
  else if (key == "spectral_radius") config.spectral_radius = parse_double(key, value);
  else if (key == "leak_rate") config.leak_rate = parse_double(key, value);
  else if (key == "sparsity") config.sparsity = parse_double(key, value);
  else if (key == "steps") config.steps = static_cast<int>(parse_int(key, value));
  else if (key == "washout") config.washout = static_cast<int>(parse_int(key, value));
  else if (key == "levels") config.levels = static_cast<int>(parse_int(key, value));
  else if (key == "potentiation") config.potentiation = parse_double(key, value);
  else if (key == "decay") config.decay = parse_double(key, value);
  else if (key == "sparsity_fraction") config.sparsity_fraction = parse_double(key, value);
  else if (key == "classes") config.classes = static_cast<int>(parse_int(key, value));
  else if (key == "ridge_beta") config.ridge_beta = parse_double(key, value);
  else if (key == "kind") config.kind = value;
  else if (key == "seed") config.seed = parse_u64(key, value);
  else if (key == "epochs") config.epochs = static_cast<int>(parse_int(key, value));
  else if (key == "subset") config.subset_per_class = static_cast<int>(parse_int(key, value));
  else if (key == "subset_seed") config.subset_seed = parse_u64(key, value);
  else if (key == "threads") config.threads = static_cast<int>(parse_int(key, value));
  else if (key == "keep_states") config.keep_states = parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto equals = trimmed.find('=');
    if (equals == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": expected key = value");
    const std::string key = trim(trimmed.substr(0, equals));
    const std::string value = trim(trimmed.substr(equals + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path.string() + ":" + std::to_string(line_number) +
                        ": expected key = value");
    apply_config_entry(config, key, value);
  }
}

}  // namespace recap
