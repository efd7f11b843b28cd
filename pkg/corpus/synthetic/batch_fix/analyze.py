import os
from azure.ai.textanalytics import TextAnalyticsClient
from azure.core.credentials import AzureKeyCredential


def detect_feedback_languages(feedback_folder, endpoint, key):
    client = TextAnalyticsClient(endpoint=endpoint, credential=AzureKeyCredential(key))
    documents = [
        open(os.path.join(feedback_folder, name), encoding="utf8").read()
        for name in os.listdir(feedback_folder)
    ]
    detected = client.detect_language(documents=documents)
    return {name: item.primary_language.iso6391_name
            for name, item in zip(os.listdir(feedback_folder), detected)}
