#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace gptutor {

// Lowercase language id, as an editor's languageId would report it.
class Language {
 public:
  static constexpr std::string_view kPlaintext = "plaintext";

  Language() : id_(kPlaintext) {}
  explicit Language(std::string id) : id_(std::move(id)) {}

  static Language plaintext() { return Language{}; }

  const std::string& id() const noexcept { return id_; }
  bool is_plaintext() const noexcept { return id_ == kPlaintext; }

  friend bool operator==(const Language&, const Language&) = default;

 private:
  std::string id_;
};

// Extension (with leading dot, lowercase) to language id.
using ExtensionMap = std::map<std::string, std::string, std::less<>>;

const ExtensionMap& default_extension_map();

// Pure lookup; anything not in the map (including no extension) is plaintext.
Language detect_language(const std::filesystem::path& path,
                         const ExtensionMap& map = default_extension_map());

}  // namespace gptutor
