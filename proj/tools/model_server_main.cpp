// Reference model server speaking the newline-delimited JSON oracle protocol
// on stdin/stdout: handshake -> ready, predict -> probs, shutdown -> exit.
// Serves the centroid classifier fit on a dataset's training split.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sset/blackbox.hpp"
#include "sset/core.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
    CLI::App app{"Centroid-classifier model server (line-JSON protocol)"};
    std::string data_dir;
    double temperature = sset::kDefaultCentroidTemperature;
    app.add_option("--data", data_dir, "Dataset directory to fit on")->required();
    app.add_option("--temperature", temperature, "Softmax temperature");
    CLI11_PARSE(app, argc, argv);

    try {
        const sset::LabeledDataset dataset = sset::load_dataset(data_dir);
        const sset::CentroidClassifier oracle = sset::fit_centroid_classifier(
            dataset.train, dataset.meta.classes, temperature);

        std::string line;
        while (std::getline(std::cin, line)) {
            if (line.empty()) {
                continue;
            }
            const json request = json::parse(line);
            const std::string type = request.value("type", "");
            if (type == "handshake") {
                if (request.at("T").get<int>() != dataset.meta.steps ||
                    request.at("V").get<int>() != dataset.meta.signals) {
                    std::cerr << "model server: handshake shape mismatch\n";
                    return 1;
                }
                std::cout << json{{"type", "ready"}, {"C", oracle.num_classes()}}.dump() << "\n"
                          << std::flush;
            } else if (type == "predict") {
                const json& values = request.at("values");
                sset::TimeSeriesInstance instance(request.at("id").get<std::string>(),
                                                  dataset.meta.steps, dataset.meta.signals);
                if (static_cast<int>(values.size()) != dataset.meta.steps) {
                    std::cerr << "model server: wrong row count\n";
                    return 1;
                }
                for (int t = 0; t < dataset.meta.steps; ++t) {
                    const json& row = values[static_cast<std::size_t>(t)];
                    if (static_cast<int>(row.size()) != dataset.meta.signals) {
                        std::cerr << "model server: wrong column count\n";
                        return 1;
                    }
                    for (int s = 0; s < dataset.meta.signals; ++s) {
                        instance.at(t, s) = row[static_cast<std::size_t>(s)].get<double>();
                    }
                }
                std::cout << json{{"type", "probs"},
                                  {"id", request.at("id").get<std::string>()},
                                  {"probs", oracle.predict(instance)}}
                                 .dump()
                          << "\n"
                          << std::flush;
            } else if (type == "shutdown") {
                return 0;
            } else {
                std::cerr << "model server: unknown message type '" << type << "'\n";
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "model server: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
