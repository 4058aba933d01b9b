#include "gptutor/language.hpp"

#include <algorithm>
#include <cctype>

namespace gptutor {

const ExtensionMap& default_extension_map() {
  static const ExtensionMap map = {
      {".py", "python"}, {".js", "javascript"}, {".ts", "typescript"},
      {".rs", "rust"},   {".go", "go"},
  };
  return map;
}

Language detect_language(const std::filesystem::path& path, const ExtensionMap& map) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext.empty()) return Language::plaintext();
  const auto it = map.find(ext);
  return it == map.end() ? Language::plaintext() : Language{it->second};
}

}  // namespace gptutor
