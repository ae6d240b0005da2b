// Scripted detector for adapter tests. Predicts 0.9 when the function text
// contains "memcpy", else 0.1. The first argument selects a misbehaviour:
//   ok | train-error | bad-prob | wrong-id | garbage | hang | exit

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include "json.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "ok";
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line);
    const std::string cmd = req.at("cmd");
    if (mode == "exit") return 0;
    if (mode == "hang") std::this_thread::sleep_for(std::chrono::seconds(30));
    if (cmd == "train") {
      if (mode == "train-error") {
        std::cout << R"({"status":"error","msg":"no GPU"})" << std::endl;
        continue;
      }
      std::ifstream data(req.at("data_path").get<std::string>());
      if (!data) {
        std::cout << R"({"status":"error","msg":"cannot read data"})" << std::endl;
        continue;
      }
      std::cout << R"({"status":"ready"})" << std::endl;
    } else if (cmd == "predict") {
      if (mode == "garbage") {
        std::cout << "not json" << std::endl;
        continue;
      }
      const std::string func = req.at("func");
      nlohmann::json reply;
      reply["id"] = mode == "wrong-id" ? std::string("other") : req.at("id").get<std::string>();
      reply["p"] = mode == "bad-prob" ? 1.5 : (func.find("memcpy") != std::string::npos ? 0.9 : 0.1);
      std::cout << reply.dump() << std::endl;
    }
  }
  return 0;
}
