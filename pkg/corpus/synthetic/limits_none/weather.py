import requests


def fetch_weather(city):
    response = requests.get("https://api.weather.example.com/v1/current",
                            params={"city": city})
    response.raise_for_status()
    return response.json()
