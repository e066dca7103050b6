#include <httplib.h>

#include "affectfuse/error.hpp"
#include "affectfuse/llm.hpp"

namespace affectfuse::llm {

HttpResponse HttpTransport::post(const HttpRequest& request) {
  // Split "scheme://host[:port]/path" into the client base and the path.
  const auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL lacks a scheme: " + request.url);
  const auto path_start = request.url.find('/', scheme_end + 3);
  const std::string base = request.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(request.timeout);
  client.set_read_timeout(request.timeout);
  client.set_write_timeout(request.timeout);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (name == "Content-Type") {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }
  auto result = client.Post(path, headers, request.body, content_type);
  if (!result) return HttpResponse{0, httplib::to_string(result.error())};
  return HttpResponse{result->status, result->body};
}

}  // namespace affectfuse::llm
