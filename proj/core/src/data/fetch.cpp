#include "riskcal/data/fetch.hpp"

#include "riskcal/errors.hpp"

#include <curl/curl.h>
#include <fmt/format.h>
#include <zlib.h>

#include <array>
#include <memory>

namespace riskcal::data {
namespace {

std::size_t append_body(char* data, std::size_t size, std::size_t nmemb, void* user) {
  static_cast<std::string*>(user)->append(data, size * nmemb);
  return size * nmemb;
}

std::string download(const std::string& url) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
  if (!curl) throw DataError("curl initialization failed");
  std::string body;
  curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 20L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, 300L);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &append_body);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) throw DataError(fmt::format("download of {} failed: {}", url, curl_easy_strerror(rc)));
  return body;
}

}  // namespace

std::string maybe_gunzip(const std::string& bytes) {
  if (bytes.size() < 2 || static_cast<unsigned char>(bytes[0]) != 0x1f || static_cast<unsigned char>(bytes[1]) != 0x8b) {
    return bytes;
  }
  z_stream zs{};
  // 16 + MAX_WBITS selects the gzip wrapper.
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw DataError("zlib initialization failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  std::array<char, 1 << 15> chunk{};
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw DataError("corrupt gzip stream");
    }
    out.append(chunk.data(), chunk.size() - zs.avail_out);
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

Dataset fetch_dataset(const ManifestEntry& entry, bool overwrite) {
  if (!overwrite && std::filesystem::exists(entry.path)) return load_dataset(entry);
  if (entry.url.empty()) throw DataError(fmt::format("dataset '{}' has no url in the manifest", entry.name));

  const std::string text = maybe_gunzip(download(entry.url));
  CsvSchema schema;
  schema.target_column = entry.target_column;
  schema.header = entry.header;
  schema.kind = entry.kind;
  schema.name = entry.name;
  Dataset ds = parse_csv(text, schema);
  if ((entry.expected_rows != 0 && ds.rows() != entry.expected_rows) ||
      (entry.expected_cols != 0 && ds.cols() != entry.expected_cols)) {
    throw DataError(fmt::format("dataset '{}' from {} has shape {}x{}, manifest expects {}x{}", entry.name, entry.url,
                                ds.rows(), ds.cols(), entry.expected_rows, entry.expected_cols));
  }
  std::filesystem::create_directories(entry.path.parent_path());
  write_csv(entry.path, ds);
  return ds;
}

}  // namespace riskcal::data
