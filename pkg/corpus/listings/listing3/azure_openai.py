import openai


def get_completion(system_message, user_message, deployment_name='deployment_name',
                   temperature=0, max_tokens=1000) -> str:
    messages = [
        {"role": "system", "content": system_message},
        {"role": "user", "content": user_message},
    ]
    response = openai.ChatCompletion.create(
        engine=deployment_name,
        messages=messages,
        temperature=temperature,
        max_tokens=max_tokens)
    return response.choices[0].message["content"]
