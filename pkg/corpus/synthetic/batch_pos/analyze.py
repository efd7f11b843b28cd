import os
from azure.ai.textanalytics import TextAnalyticsClient
from azure.core.credentials import AzureKeyCredential


def detect_feedback_languages(feedback_folder, endpoint, key):
    client = TextAnalyticsClient(endpoint=endpoint, credential=AzureKeyCredential(key))
    results = {}
    for file_name in os.listdir(feedback_folder):
        text = open(os.path.join(feedback_folder, file_name), encoding="utf8").read()
        detected = client.detect_language(documents=[text])[0]
        results[file_name] = detected.primary_language.iso6391_name
    return results
